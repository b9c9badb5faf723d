#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "enopt/model.hpp"
#include "enopt/solver.hpp"

// Parameter sweeps: re-solve for the optimal frequency while one or two
// scenario parameters vary over a grid. Grid points whose parameter
// combination violates a scenario invariant become gaps, not errors.

namespace enopt {

enum class SweepParam { FK, Beta, Xi, Gamma, PBack, PDrop, M1, M2 };

inline constexpr std::string_view to_string(SweepParam p) noexcept {
  switch (p) {
    case SweepParam::FK: return "f_k";
    case SweepParam::Beta: return "beta";
    case SweepParam::Xi: return "xi";
    case SweepParam::Gamma: return "gamma";
    case SweepParam::PBack: return "p_back";
    case SweepParam::PDrop: return "p_drop";
    case SweepParam::M1: return "m1";
    case SweepParam::M2: return "m2";
  }
  return "?";
}

inline SweepParam sweep_param_from_name(std::string_view name) {
  for (SweepParam p : {SweepParam::FK, SweepParam::Beta, SweepParam::Xi,
                       SweepParam::Gamma, SweepParam::PBack, SweepParam::PDrop,
                       SweepParam::M1, SweepParam::M2})
    if (name == to_string(p)) return p;
  throw validation_error("unknown sweep parameter '" + std::string(name) +
                         "' (one of f_k, beta, xi, gamma, p_back, p_drop, "
                         "m1, m2)");
}

/// Returns a copy of the base scenario with one parameter replaced.
/// Throws validation_error when the result violates an invariant.
inline Scenario with_param(const Scenario& base, SweepParam param,
                           double value) {
  VoltageFreqMap vmap = base.vmap();
  double xi = base.cpu().xi(), gamma = base.cpu().gamma();
  double cc_b = base.time().cc_b(), f_k = base.time().f_k(),
         beta = base.time().beta();
  double p_drop = base.static_power().p_drop(),
         p_back = base.static_power().p_back();
  switch (param) {
    case SweepParam::FK: f_k = value; break;
    case SweepParam::Beta: beta = value; break;
    case SweepParam::Xi: xi = value; break;
    case SweepParam::Gamma: gamma = value; break;
    case SweepParam::PBack: p_back = value; break;
    case SweepParam::PDrop: p_drop = value; break;
    case SweepParam::M1:
    case SweepParam::M2: {
      if (!base.vmap().is_affine())
        throw validation_error(
            "sweep: m1/m2 apply only to affine voltage maps");
      const AffineVoltageMap& a = base.vmap().affine_coeffs();
      vmap = param == SweepParam::M1 ? VoltageFreqMap::affine(value, a.m2)
                                     : VoltageFreqMap::affine(a.m1, value);
      break;
    }
  }
  return Scenario(std::move(vmap), CpuPowerParams(xi, gamma),
                  ExecTimeParams(cc_b, f_k, beta),
                  StaticPower(p_drop, p_back), base.window());
}

struct SweepSpec {
  SweepParam param;
  GridSpec range;
  std::optional<SweepParam> param2{};
  std::optional<GridSpec> range2{};
  bool clamp = false;  // exterior optima stay visible by default
  bool include_back = true;
};

struct SweepCell {
  bool valid = false;
  double f_opt = std::numeric_limits<double>::quiet_NaN();
  ClampStatus clamped = ClampStatus::Unclamped;
  double e_min = std::numeric_limits<double>::quiet_NaN();
  double power_ratio = std::numeric_limits<double>::quiet_NaN();  // P_cpu/P_back at f_opt
};

/// Grid of solver results. Cells are stored row-major with axis1 as the
/// fast index; a 1-D sweep has an empty axis2 and a single row.
struct SweepGrid {
  SweepParam param1;
  std::optional<SweepParam> param2;
  std::vector<double> axis1;
  std::vector<double> axis2;
  std::vector<SweepCell> cells;

  std::size_t n1() const noexcept { return axis1.size(); }
  std::size_t n2() const noexcept { return axis2.empty() ? 1 : axis2.size(); }
  const SweepCell& at(std::size_t i1, std::size_t i2 = 0) const {
    return cells.at(i2 * n1() + i1);
  }
};

/// Runs the solver at every grid point, in deterministic row-major order.
inline SweepGrid sweep(const Scenario& base, const SweepSpec& spec) {
  detail::require(spec.param2.has_value() == spec.range2.has_value(),
                  "sweep: param2 and range2 must be given together");
  SweepGrid grid;
  grid.param1 = spec.param;
  grid.param2 = spec.param2;
  grid.axis1 = spec.range.values();
  if (spec.range2) grid.axis2 = spec.range2->values();
  if (grid.axis1.empty()) throw validation_error("sweep: empty grid");

  const std::size_t rows = grid.n2();
  grid.cells.resize(rows * grid.n1());
  for (std::size_t i2 = 0; i2 < rows; ++i2) {
    for (std::size_t i1 = 0; i1 < grid.n1(); ++i1) {
      SweepCell& cell = grid.cells[i2 * grid.n1() + i1];
      try {
        Scenario s = with_param(base, spec.param, grid.axis1[i1]);
        if (spec.param2)
          s = with_param(s, *spec.param2, grid.axis2[i2]);
        const FoptResult r =
            find_fopt_numeric(s, spec.clamp, spec.include_back);
        cell.valid = true;
        cell.f_opt = r.f_opt;
        cell.clamped = r.clamped;
        cell.e_min = r.e_min;
        const double p_back = s.static_power().p_back();
        const double p_cpu = cpu_power(s.cpu(), s.vmap(), r.f_opt);
        cell.power_ratio = p_back > 0.0
                               ? p_cpu / p_back
                               : std::numeric_limits<double>::infinity();
      } catch (const validation_error&) {
        // parameter combination violates an invariant: gap
      } catch (const domain_error&) {
        // solver stepped outside the model's domain (e.g. voltage table)
      }
    }
  }
  return grid;
}

struct SpreadReport {
  std::vector<double> spreads;  // max - min of f_opt across the chosen axis
  double mean_spread = 0.0;
};

/// Spread of f_opt across one axis, reported per point of the other axis.
/// axis is 1 or 2.
inline SpreadReport spread_report(const SweepGrid& grid, int axis) {
  detail::require(axis == 1 || axis == 2, "spread: axis must be 1 or 2");
  if (axis == 2 && grid.axis2.empty())
    throw validation_error("spread: grid has no second axis");
  const std::size_t along = axis == 1 ? grid.n1() : grid.n2();
  const std::size_t across = axis == 1 ? grid.n2() : grid.n1();
  detail::require(along >= 2, "spread: chosen axis needs at least 2 values");

  SpreadReport report;
  for (std::size_t j = 0; j < across; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t valid = 0;
    for (std::size_t i = 0; i < along; ++i) {
      const SweepCell& cell = axis == 1 ? grid.at(i, j) : grid.at(j, i);
      if (!cell.valid) continue;
      ++valid;
      lo = std::min(lo, cell.f_opt);
      hi = std::max(hi, cell.f_opt);
    }
    if (valid == 0)
      throw domain_error("spread: all-gap row at index " + std::to_string(j));
    report.spreads.push_back(valid >= 2 ? hi - lo : 0.0);
  }
  double sum = 0.0;
  for (double s : report.spreads) sum += s;
  report.mean_spread = sum / static_cast<double>(report.spreads.size());
  return report;
}

struct PowerRatioPoint {
  double p_back;  // W
  double f_opt;   // unclamped, GHz
  double ratio;   // P_cpu(f_opt) / p_back, +inf at p_back = 0
};

/// Unclamped optimum and the P_cpu/P_back ratio at it, for each
/// background power level in the range.
inline std::vector<PowerRatioPoint> power_ratio_at_fopt(
    const Scenario& base, const GridSpec& p_back_range) {
  std::vector<PowerRatioPoint> curve;
  for (double p_back : p_back_range.values()) {
    const Scenario s = with_param(base, SweepParam::PBack, p_back);
    const FoptResult r = find_fopt_numeric(s, /*clamp=*/false);
    const double p_cpu = cpu_power(s.cpu(), s.vmap(), r.f_opt);
    curve.push_back({p_back, r.f_opt,
                     p_back > 0.0 ? p_cpu / p_back
                                  : std::numeric_limits<double>::infinity()});
  }
  return curve;
}

}  // namespace enopt
