#pragma once

#include "enopt/errors.hpp"
#include "enopt/fitting.hpp"
#include "enopt/model.hpp"
#include "enopt/scenario_io.hpp"
#include "enopt/sensitivity.hpp"
#include "enopt/solver.hpp"
#include "enopt/strategy.hpp"
