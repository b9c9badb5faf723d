#pragma once

#include <algorithm>
#include <string_view>

#include "enopt/model.hpp"
#include "enopt/solver.hpp"

// Places the unclamped optimum relative to the exploitable window and
// prices the three candidate policies: run at the lowest frequency, chase
// the interior optimum, or race to halt at full speed.

namespace enopt {

enum class Regime { BelowWindow, Exploitable, AboveWindow };
enum class Action { RunAtMin, ChaseFopt, RaceToHalt };

inline constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::BelowWindow: return "below-window";
    case Regime::Exploitable: return "exploitable";
    case Regime::AboveWindow: return "above-window";
  }
  return "?";
}

inline constexpr std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::RunAtMin: return "run-at-min";
    case Action::ChaseFopt: return "chase-fopt";
    case Action::RaceToHalt: return "race-to-halt";
  }
  return "?";
}

struct Classification {
  Regime regime;
  Action action;
  double f_opt_unclamped;  // GHz
};

/// Classifies a scenario by where the unclamped optimum falls. Boundary
/// hits within 1e-6 GHz count as exploitable.
inline Classification classify(const Scenario& s) {
  constexpr double tol = 1e-6;
  const double f_opt = find_fopt_numeric(s, /*clamp=*/false).f_opt;
  Regime regime = Regime::Exploitable;
  if (f_opt < s.exploitable_min() - tol)
    regime = Regime::BelowWindow;
  else if (f_opt > s.exploitable_max() + tol)
    regime = Regime::AboveWindow;
  Action action = Action::ChaseFopt;
  if (regime == Regime::BelowWindow) action = Action::RunAtMin;
  if (regime == Regime::AboveWindow) action = Action::RaceToHalt;
  return Classification{regime, action, f_opt};
}

struct StrategyCost {
  double f_low;    // lower edge of the exploitable window
  double f_high;   // f_max
  double f_opt;    // clamped optimum
  double e_low;    // J, run at f_low
  double e_high;   // J, busy phase at f_max (race-to-halt proxy)
  double e_opt;    // J, at the clamped optimum
  Action best;
  double savings_vs_low_pct;   // of the best option relative to f_low
  double savings_vs_high_pct;  // of the best option relative to f_max
};

/// System energy of the three candidate strategies. Race-to-halt is
/// priced by its busy phase only; the halt-state draw is not modeled.
inline StrategyCost strategy_cost(const Scenario& s) {
  StrategyCost cost{};
  double f_low = s.exploitable_min();
  if (f_low <= s.time().f_k())
    f_low = s.time().f_k() + 1e-9 * (s.exploitable_max() - s.time().f_k());
  cost.f_low = f_low;
  cost.f_high = s.exploitable_max();
  const FoptResult r = find_fopt_numeric(s, /*clamp=*/true);
  cost.f_opt = r.f_opt;
  cost.e_low = system_energy(s, cost.f_low);
  cost.e_high = system_energy(s, cost.f_high);
  cost.e_opt = system_energy(s, cost.f_opt);

  const double e_best = std::min({cost.e_low, cost.e_high, cost.e_opt});
  if (r.clamped == ClampStatus::AtUpperBound)
    cost.best = Action::RaceToHalt;
  else if (r.clamped == ClampStatus::AtLowerBound)
    cost.best = Action::RunAtMin;
  else
    cost.best = Action::ChaseFopt;
  cost.savings_vs_low_pct = 100.0 * (cost.e_low - e_best) / cost.e_low;
  cost.savings_vs_high_pct = 100.0 * (cost.e_high - e_best) / cost.e_high;
  return cost;
}

}  // namespace enopt
