#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "enopt/detail/small_linalg.hpp"
#include "enopt/model.hpp"
#include "enopt/solver.hpp"

// Parameter estimation from measurement traces. All estimators are
// deterministic: linear least squares where the model is linear in its
// parameters, plus a one-dimensional golden-section search for f_k.

namespace enopt {

/// One measured point: execution time in seconds or power in watts at a
/// given clock frequency, optionally with the supply voltage observed.
struct TraceSample {
  double f_ghz;
  double value;
  std::optional<double> voltage_v{};
};

/// Residual statistics of a fit: per-sample residuals (model - measured)
/// and percentiles of the relative errors.
struct FitReport {
  std::vector<double> residuals;
  std::vector<double> rel_errors;
  double p5 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
};

namespace detail {

inline double percentile(std::vector<double> sorted, double p) {
  if (sorted.empty()) return 0.0;
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * (h - lo);
}

inline FitReport make_report(std::vector<double> residuals,
                             const std::vector<double>& measured) {
  FitReport r;
  r.residuals = std::move(residuals);
  r.rel_errors.reserve(r.residuals.size());
  for (std::size_t i = 0; i < r.residuals.size(); ++i)
    r.rel_errors.push_back(measured[i] != 0.0
                               ? std::abs(r.residuals[i] / measured[i])
                               : std::abs(r.residuals[i]));
  std::vector<double> sorted = r.rel_errors;
  std::sort(sorted.begin(), sorted.end());
  r.p5 = percentile(sorted, 0.05);
  r.p50 = percentile(sorted, 0.50);
  r.p95 = percentile(sorted, 0.95);
  return r;
}

inline std::size_t distinct_freqs(const std::vector<TraceSample>& samples) {
  std::set<double> fs;
  for (const TraceSample& s : samples) fs.insert(s.f_ghz);
  return fs.size();
}

inline void check_samples(const std::vector<TraceSample>& samples,
                          const FrequencyWindow& window,
                          std::size_t min_samples, std::size_t min_distinct,
                          const char* what) {
  if (samples.size() < min_samples)
    throw fit_error(std::string(what) + ": needs at least " +
                    std::to_string(min_samples) + " samples (got " +
                    std::to_string(samples.size()) + ")");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const TraceSample& s = samples[i];
    if (!(std::isfinite(s.f_ghz) && s.f_ghz > 0.0))
      throw fit_error(std::string(what) + ": sample " + std::to_string(i) +
                      ": frequency must be > 0");
    if (!(std::isfinite(s.value) && s.value > 0.0))
      throw fit_error(std::string(what) + ": sample " + std::to_string(i) +
                      ": value must be > 0");
    if (s.f_ghz < window.f_min() - 1e-9 || s.f_ghz > window.f_max() + 1e-9)
      throw fit_error(std::string(what) + ": sample " + std::to_string(i) +
                      ": f=" + num(s.f_ghz) + " outside the window [" +
                      num(window.f_min()) + ", " + num(window.f_max()) + "]");
  }
  if (distinct_freqs(samples) < min_distinct)
    throw fit_error(std::string(what) + ": needs samples at " +
                    std::to_string(min_distinct) + " distinct frequencies");
}

}  // namespace detail

// ---- voltage map ----------------------------------------------------------

struct VoltageMapFit {
  VoltageFreqMap map;  // affine
  FitReport report;
};

/// Ordinary least-squares line V = m1 f + m2 through the given points.
/// Nonpositive coefficients are rejected; the thrown error carries the
/// unconstrained estimate.
inline VoltageMapFit fit_voltage_map(const std::vector<VoltagePoint>& points) {
  if (points.size() < 2)
    throw fit_error("voltage map fit: needs at least 2 points");
  double sx = 0.0, sy = 0.0;
  for (const VoltagePoint& p : points) {
    detail::require(std::isfinite(p.f_ghz) && std::isfinite(p.volts),
                    "voltage map fit: points must be finite");
    sx += p.f_ghz;
    sy += p.volts;
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const VoltagePoint& p : points) {
    sxx += (p.f_ghz - mx) * (p.f_ghz - mx);
    sxy += (p.f_ghz - mx) * (p.volts - my);
  }
  if (sxx <= 0.0)
    throw fit_error("voltage map fit: all points share one frequency; the "
                    "line is underdetermined");
  const double m1 = sxy / sxx;
  const double m2 = my - m1 * mx;
  if (!(m1 > 0.0) || !(m2 > 0.0))
    throw fit_constraint_error(
        "voltage map fit: regression coefficients must be positive "
        "(unconstrained estimate m1=" +
            detail::num(m1) + ", m2=" + detail::num(m2) + ")",
        m1, m2);

  std::vector<double> residuals, measured;
  for (const VoltagePoint& p : points) {
    residuals.push_back(m1 * p.f_ghz + m2 - p.volts);
    measured.push_back(p.volts);
  }
  return VoltageMapFit{VoltageFreqMap::affine(m1, m2),
                       detail::make_report(std::move(residuals), measured)};
}

// ---- microprocessor power ---------------------------------------------

struct CpuPowerFit {
  CpuPowerParams params;
  double p_static;  // W
  FitReport report;
};

/// Fits P = P_static + xi * (f V^2) + xi*gamma * (f V^3), which is linear
/// in (P_static, xi, xi*gamma). A negative leakage estimate is clamped by
/// refitting with gamma = 0. Absolute residuals are minimized; power
/// values span less than an order of magnitude.
inline CpuPowerFit fit_cpu_power(const std::vector<TraceSample>& samples,
                                 const FrequencyWindow& window) {
  detail::check_samples(samples, window, 4, 3, "power fit");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].voltage_v)
      throw fit_error("power fit: sample " + std::to_string(i) +
                      ": missing voltage");
    if (!(std::isfinite(*samples[i].voltage_v) && *samples[i].voltage_v > 0.0))
      throw fit_error("power fit: sample " + std::to_string(i) +
                      ": voltage must be > 0");
  }

  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> atb{};
  for (const TraceSample& s : samples) {
    const double v = *s.voltage_v;
    const std::array<double, 3> row{1.0, s.f_ghz * v * v, s.f_ghz * v * v * v};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ata[r][c] += row[r] * row[c];
      atb[r] += row[r] * s.value;
    }
  }
  std::array<double, 3> sol{};
  if (!detail::solve_linear<3>(ata, atb, sol))
    throw fit_error("power fit: rank-deficient design matrix; samples do not "
                    "separate the three parameters");
  double p_static = sol[0], theta1 = sol[1], theta2 = sol[2];

  if (theta2 < 0.0) {
    // gamma clamped to zero, deterministic two-parameter refit
    std::array<std::array<double, 2>, 2> ata2{};
    std::array<double, 2> atb2{};
    for (const TraceSample& s : samples) {
      const double v = *s.voltage_v;
      const std::array<double, 2> row{1.0, s.f_ghz * v * v};
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) ata2[r][c] += row[r] * row[c];
        atb2[r] += row[r] * s.value;
      }
    }
    std::array<double, 2> sol2{};
    if (!detail::solve_linear<2>(ata2, atb2, sol2))
      throw fit_error("power fit: rank-deficient design matrix");
    p_static = sol2[0];
    theta1 = sol2[1];
    theta2 = 0.0;
  }
  if (!(theta1 > 0.0))
    throw fit_error("power fit: xi=" + detail::num(theta1) +
                    " is not > 0 after refit");
  const double xi = theta1;
  const double gamma = theta2 == 0.0 ? 0.0 : theta2 / theta1;

  std::vector<double> residuals, measured;
  for (const TraceSample& s : samples) {
    const double v = *s.voltage_v;
    const double model = p_static + (1.0 + gamma * v) * xi * s.f_ghz * v * v;
    residuals.push_back(model - s.value);
    measured.push_back(s.value);
  }
  return CpuPowerFit{CpuPowerParams(xi, gamma), p_static,
                     detail::make_report(std::move(residuals), measured)};
}

// ---- execution time ---------------------------------------------------

struct ExecTimeFit {
  ExecTimeParams params;
  FitReport report;
};

/// Separable fit of dt = cc_b/(f - f_k) + cc_b*beta. For a fixed f_k the
/// model is linear in (cc_b, cc_b*beta); f_k itself is located by a
/// golden-section search over [0, 0.95*min f], the cap keeping the pole
/// from absorbing measurement noise. Relative residuals are minimized to
/// match how time errors are reported.
inline ExecTimeFit fit_exec_time(const std::vector<TraceSample>& samples,
                                 const FrequencyWindow& window) {
  detail::check_samples(samples, window, 4, 3, "time fit");
  double min_f = samples.front().f_ghz;
  for (const TraceSample& s : samples) min_f = std::min(min_f, s.f_ghz);

  struct InnerFit {
    double cc_b, slack;  // slack = cc_b * beta
    double sse;
    bool ok;
  };
  const auto inner = [&](double fk) -> InnerFit {
    std::array<std::array<double, 2>, 2> ata{};
    std::array<double, 2> atb{};
    for (const TraceSample& s : samples) {
      const double w = 1.0 / s.value;  // relative residuals
      const std::array<double, 2> row{w / (s.f_ghz - fk), w};
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) ata[r][c] += row[r] * row[c];
        atb[r] += row[r] * (s.value * w);
      }
    }
    std::array<double, 2> sol{};
    if (!detail::solve_linear<2>(ata, atb, sol)) return {0.0, 0.0, 0.0, false};
    double sse = 0.0;
    for (const TraceSample& s : samples) {
      const double model = sol[0] / (s.f_ghz - fk) + sol[1];
      const double r = (model - s.value) / s.value;
      sse += r * r;
    }
    return {sol[0], sol[1], sse, true};
  };
  const auto objective = [&](double fk) {
    const InnerFit f = inner(fk);
    return f.ok ? f.sse : std::numeric_limits<double>::infinity();
  };

  const double fk_hi = 0.95 * min_f;
  const double fk_best = detail::seeded_min(objective, 0.0, fk_hi, 129, 1e-10);
  const InnerFit best = inner(fk_best);
  if (!best.ok)
    throw fit_error("time fit: rank-deficient design matrix; samples do not "
                    "separate cc_b and beta");
  if (!(best.cc_b > 0.0))
    throw fit_error("time fit: cc_b=" + detail::num(best.cc_b) +
                    " is not > 0; data does not follow the model");
  const double beta = best.slack / best.cc_b;
  if (!(1.0 / (window.f_max() - fk_best) + beta > 0.0))
    throw fit_error("time fit: fitted beta=" + detail::num(beta) +
                    " makes the per-cycle time nonpositive at f_max=" +
                    detail::num(window.f_max()));

  ExecTimeParams params(best.cc_b, fk_best, beta);
  std::vector<double> residuals, measured;
  for (const TraceSample& s : samples) {
    residuals.push_back(exec_time(params, s.f_ghz) - s.value);
    measured.push_back(s.value);
  }
  return ExecTimeFit{params,
                     detail::make_report(std::move(residuals), measured)};
}

}  // namespace enopt
