#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "enopt/model.hpp"
#include "enopt/solver.hpp"

// Shared fixtures and test-side oracles. The oracles here (dense grid
// scans, finite differences) deliberately avoid the library's search and
// derivative code so they can vouch for it.

namespace testutil {

// Cortex A9 class system: affine voltage law, 0.2..1.6 GHz window.
inline enopt::Scenario reference_scenario(double xi, double p_back,
                                          double f_k = 0.0, double beta = 0.0,
                                          double p_drop = 0.0,
                                          double cc_b = 1.0,
                                          double gamma = 3.137) {
  return enopt::Scenario(enopt::VoltageFreqMap::affine(0.330, 0.808),
                         enopt::CpuPowerParams(xi, gamma),
                         enopt::ExecTimeParams(cc_b, f_k, beta),
                         enopt::StaticPower(p_drop, p_back),
                         enopt::FrequencyWindow(0.2, 1.6));
}

// Gold-Rader input size 2^12 fit: negative beta, visible f_k.
inline enopt::Scenario n12_scenario() {
  return enopt::Scenario(enopt::VoltageFreqMap::affine(0.330, 0.808),
                         enopt::CpuPowerParams(0.137, 4.36),
                         enopt::ExecTimeParams(144.359, 0.13, -0.202),
                         enopt::StaticPower(0.0, 0.469),
                         enopt::FrequencyWindow(0.2, 1.6));
}

/// Random valid scenario. Mostly affine maps; with_tables mixes in
/// quantized table maps; beta is negative in about a quarter of draws.
inline enopt::Scenario random_scenario(std::mt19937_64& rng,
                                       bool with_tables = true,
                                       bool nonnegative_beta = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double f_min = 0.1 + 0.4 * u(rng);
  const double f_max = f_min + 0.5 + 2.0 * u(rng);
  const double f_k = u(rng) < 0.3 ? 0.0 : 0.8 * f_max * u(rng) * 0.9;
  const double m1 = 0.05 + 0.75 * u(rng);
  const double m2 = 0.2 + 1.0 * u(rng);
  const double xi = 0.02 + 0.58 * u(rng);
  const double gamma = 8.0 * u(rng);
  const double p_drop = 2.0 * u(rng);
  const double p_back = 5.0 * u(rng);
  const double cc_b = 0.5 + 499.5 * u(rng);

  double beta;
  const double beta_floor = -1.0 / (f_max - f_k);
  if (nonnegative_beta || u(rng) < 0.75)
    beta = 0.6 * u(rng) * (u(rng) < 0.3 ? 0.0 : 1.0);
  else
    beta = 0.8 * beta_floor * u(rng);  // negative but valid

  enopt::VoltageFreqMap vmap = enopt::VoltageFreqMap::affine(m1, m2);
  if (with_tables && u(rng) < 0.15) {
    std::vector<enopt::VoltagePoint> rows;
    const int n = 6;
    for (int i = 0; i < n; ++i) {
      const double f = f_min * 0.9 + (f_max * 1.05 - f_min * 0.9) * i / (n - 1);
      const double v = m1 * f + m2;
      rows.push_back({f, std::round(v / 0.025) * 0.025});
    }
    for (int i = 1; i < n; ++i)
      rows[i].volts = std::max(rows[i].volts, rows[i - 1].volts);
    vmap = enopt::VoltageFreqMap::table(rows);
  }
  return enopt::Scenario(std::move(vmap), enopt::CpuPowerParams(xi, gamma),
                         enopt::ExecTimeParams(cc_b, f_k, beta),
                         enopt::StaticPower(p_drop, p_back),
                         enopt::FrequencyWindow(f_min, f_max));
}

/// Dense-grid argmin of the normalized energy over the exploitable
/// window; returns the grid frequency, not a refined location.
inline double grid_argmin_fopt(const enopt::Scenario& s, int points,
                               bool include_back = true) {
  double lo = s.exploitable_min();
  const double hi = s.exploitable_max();
  if (lo <= s.time().f_k()) lo = s.time().f_k() + 1e-9 * (hi - s.time().f_k());
  double best_f = lo;
  double best_e = enopt::normalized_energy(s, lo, include_back);
  for (int i = 1; i < points; ++i) {
    const double f = lo + (hi - lo) * i / (points - 1);
    const double e = enopt::normalized_energy(s, f, include_back);
    if (e < best_e) {
      best_e = e;
      best_f = f;
    }
  }
  return best_f;
}

/// Central finite differences of the normalized energy.
inline double fd_first(const enopt::Scenario& s, double f, double h,
                       bool include_back = true) {
  return (enopt::normalized_energy(s, f + h, include_back) -
          enopt::normalized_energy(s, f - h, include_back)) /
         (2.0 * h);
}

inline double fd_second(const enopt::Scenario& s, double f, double h,
                        bool include_back = true) {
  return (enopt::normalized_energy(s, f + h, include_back) -
          2.0 * enopt::normalized_energy(s, f, include_back) +
          enopt::normalized_energy(s, f - h, include_back)) /
         (h * h);
}

}  // namespace testutil
