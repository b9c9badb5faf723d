#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "enopt/detail/small_linalg.hpp"
#include "enopt/model.hpp"

// Finds the energy-minimizing clock frequency, both by numeric
// minimization of the full model and through the closed-form solutions
// of its quadratic power approximation.

namespace enopt {

/// Quadratic approximation k f^2 + l f + m of the microprocessor power.
/// k must be strictly positive; l and m may have either sign.
class QuadApprox {
public:
  QuadApprox(double k, double l, double m) : k_(k), l_(l), m_(m) {
    detail::require(std::isfinite(k) && k > 0.0,
                    "quad approx: k must be > 0 (got " + detail::num(k) + ")");
    detail::require(std::isfinite(l) && std::isfinite(m),
                    "quad approx: l and m must be finite");
  }
  double k() const noexcept { return k_; }
  double l() const noexcept { return l_; }
  double m() const noexcept { return m_; }

  /// k f^2 + l f + m.
  double power(double f) const noexcept { return (k_ * f + l_) * f + m_; }

private:
  double k_;
  double l_;
  double m_;
};

enum class ClampStatus { Interior, AtLowerBound, AtUpperBound, Unclamped };

enum class SolveMethod { Numeric, NumericQuad, Cubic, BetaZero, FkZero };

constexpr std::string_view to_string(ClampStatus s) noexcept {
  switch (s) {
    case ClampStatus::Interior: return "interior";
    case ClampStatus::AtLowerBound: return "at-lower-bound";
    case ClampStatus::AtUpperBound: return "at-upper-bound";
    case ClampStatus::Unclamped: return "unclamped";
  }
  return "?";
}

constexpr std::string_view to_string(SolveMethod m) noexcept {
  switch (m) {
    case SolveMethod::Numeric: return "numeric";
    case SolveMethod::NumericQuad: return "numeric-quad";
    case SolveMethod::Cubic: return "cubic";
    case SolveMethod::BetaZero: return "beta-zero";
    case SolveMethod::FkZero: return "fk-zero";
  }
  return "?";
}

struct FoptResult {
  double f_opt;         // GHz
  ClampStatus clamped;
  double e_min;         // J per giga-cycle at f_opt
  SolveMethod method;
};

namespace detail {

// Location tolerance of the numeric search and the seed-scan density.
inline constexpr double kFoptTol = 1e-6;
inline constexpr int kSeedScanPoints = 512;
inline constexpr double kUnclampedCap = 64.0;  // GHz

template <class F>
double golden_min(F&& fn, double a, double b, double tol) {
  constexpr double gr = 0.6180339887498949;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = fn(c), fd = fn(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = fn(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = fn(d);
    }
  }
  return 0.5 * (a + b);
}

/// Coarse scan over [lo, hi], then golden-section refinement of the
/// interval bracketing the grid argmin.
template <class F>
double seeded_min(F&& fn, double lo, double hi, int points, double tol) {
  const double step = (hi - lo) / (points - 1);
  double best_f = fn(lo);
  int best_i = 0;
  for (int i = 1; i < points; ++i) {
    const double x = (i == points - 1) ? hi : lo + i * step;
    const double f = fn(x);
    if (f < best_f) {
      best_f = f;
      best_i = i;
    }
  }
  const double a = (best_i == 0) ? lo : lo + (best_i - 1) * step;
  const double b = (best_i == points - 1) ? hi : lo + (best_i + 1) * step;
  return golden_min(fn, a, b, tol);
}

/// Safeguarded Newton refinement on the first derivative; golden-section
/// localization alone is limited by function-value rounding noise.
template <class D>
double newton_polish(D&& deriv, double x, double lo, double hi) {
  for (int i = 0; i < 12; ++i) {
    const auto [d1, d2] = deriv(x);
    if (!(d2 > 0.0) || !std::isfinite(d1)) break;
    const double step = d1 / d2;
    const double nx = x - step;
    if (!(nx > lo) || !(nx < hi)) break;
    x = nx;
    if (std::abs(step) < 1e-14) break;
  }
  return x;
}

struct QuadObjective {
  // (k f^2 + l f + m + p_static) * (1/(f - f_k) + beta)
  double k, l, m, p_static, f_k, beta;

  double operator()(double f) const noexcept {
    return ((k * f + l) * f + m + p_static) * (1.0 / (f - f_k) + beta);
  }
  std::pair<double, double> derivatives(double f) const noexcept {
    const double den = f - f_k;
    const double d1 = beta * (2.0 * k * f + l) +
                      (k * f * f - 2.0 * k * f_k * f - (l * f_k + m + p_static)) /
                          (den * den);
    const double d2 = 2.0 * k * beta +
                      2.0 * (k * f_k * f_k + l * f_k + m + p_static) /
                          (den * den * den);
    return {d1, d2};
  }
};

}  // namespace detail

// ---- quadratic approximation ------------------------------------------

struct QuadFit {
  QuadApprox coeffs;
  double max_rel_error;  // of the approximation over the fitted window
};

/// Least-squares quadratic approximation of a quartic power curve over a
/// uniform 101-point grid on the window. Residuals are relative so the
/// small-power points near f_min are not swamped by the large ones;
/// if the polynomial is not strictly positive on the grid the fit falls
/// back to absolute residuals.
inline QuadFit fit_quad_approx(const QuarticCoeffs& q,
                               const FrequencyWindow& window) {
  constexpr int n = 101;
  std::array<double, n> fs, ys;
  const double step = (window.f_max() - window.f_min()) / (n - 1);
  bool all_positive = true;
  for (int i = 0; i < n; ++i) {
    fs[i] = window.f_min() + i * step;
    ys[i] = quartic_eval(q, fs[i]);
    all_positive = all_positive && ys[i] > 0.0;
  }
  std::array<std::array<double, 3>, 3> ata{};
  std::array<double, 3> atb{};
  for (int i = 0; i < n; ++i) {
    const double w = all_positive ? 1.0 / ys[i] : 1.0;
    const std::array<double, 3> row{fs[i] * fs[i] * w, fs[i] * w, w};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) ata[r][c] += row[r] * row[c];
      atb[r] += row[r] * (ys[i] * w);
    }
  }
  std::array<double, 3> sol{};
  if (!detail::solve_linear<3>(ata, atb, sol))
    throw fit_error("quad approx: degenerate normal equations");
  if (!(sol[0] > 0.0))
    throw fit_error("quad approx: fitted k=" + detail::num(sol[0]) +
                    " is not > 0; approximation invalid");
  QuadApprox approx(sol[0], sol[1], sol[2]);
  double max_rel = 0.0;
  for (int i = 0; i < n; ++i) {
    if (ys[i] > 0.0)
      max_rel = std::max(max_rel, std::abs(approx.power(fs[i]) - ys[i]) / ys[i]);
  }
  return QuadFit{approx, max_rel};
}

inline QuadFit fit_quad_approx(const Scenario& s) {
  return fit_quad_approx(quartic_coeffs(s.cpu(), s.vmap()), s.window());
}

// ---- numeric solver -----------------------------------------------------

namespace detail {

template <class F, class D>
FoptResult minimize_on(F&& objective, D&& deriv, bool has_deriv, double lo,
                       double hi, bool clamp, double report_lo,
                       SolveMethod method) {
  double f = seeded_min(objective, lo, hi, kSeedScanPoints, kFoptTol);
  ClampStatus status = ClampStatus::Unclamped;
  if (clamp) {
    if (f <= lo + kFoptTol) {
      f = report_lo;
      status = ClampStatus::AtLowerBound;
    } else if (f >= hi - kFoptTol) {
      f = hi;
      status = ClampStatus::AtUpperBound;
    } else {
      status = ClampStatus::Interior;
    }
  }
  if (has_deriv &&
      (status == ClampStatus::Interior || status == ClampStatus::Unclamped))
    f = newton_polish(deriv, f, lo, hi);
  return FoptResult{f, status, objective(f), method};
}

}  // namespace detail

/// Minimizes the normalized energy over the exploitable window. With
/// clamp the result is pinned to the window and labeled; without it the
/// search runs over (f_k, 64 GHz] (capped where a table map ends or a
/// negative beta drives the per-cycle time to zero) so exterior optima
/// stay visible.
inline FoptResult find_fopt_numeric(const Scenario& s, bool clamp = true,
                                    bool include_back = true) {
  const double fk = s.time().f_k();
  const double beta = s.time().beta();
  double lo, hi;
  if (clamp) {
    lo = s.exploitable_min();
    hi = s.exploitable_max();
    if (lo <= fk) lo = fk + 1e-9 * (hi - fk);  // singular at f_k itself
  } else {
    lo = std::max(fk + 1e-9, s.vmap().min_freq());
    hi = std::min(detail::kUnclampedCap, s.vmap().max_freq());
    if (beta < 0.0) hi = std::min(hi, fk + (1.0 - 1e-9) / (-beta));
  }
  if (!(hi > lo)) throw validation_error("fopt: empty search window");

  const auto objective = [&](double f) {
    return normalized_energy(s, f, include_back);
  };
  const bool affine = s.vmap().is_affine();
  const auto deriv = [&](double f) {
    const EnergyDerivatives d = energy_derivatives(s, f, include_back);
    return std::pair<double, double>{d.first, d.second};
  };
  return detail::minimize_on(objective, deriv, affine, lo, hi, clamp,
                             s.exploitable_min(), SolveMethod::Numeric);
}

/// Same search on the quadratic-approximation objective.
inline FoptResult find_fopt_numeric(const QuadApprox& q,
                                    const ExecTimeParams& time, double p_drop,
                                    double p_back, const FrequencyWindow& window,
                                    bool clamp = true) {
  const double fk = time.f_k();
  const detail::QuadObjective obj{q.k(),  q.l(), q.m(), p_drop + p_back,
                                  fk,     time.beta()};
  double lo, hi;
  if (clamp) {
    lo = std::max(window.f_min(), fk);
    hi = window.f_max();
    if (lo <= fk) lo = fk + 1e-9 * (hi - fk);
  } else {
    lo = fk + 1e-9;
    hi = detail::kUnclampedCap;
    if (time.beta() < 0.0) hi = std::min(hi, fk + (1.0 - 1e-9) / (-time.beta()));
  }
  if (!(hi > lo)) throw validation_error("fopt: empty search window");
  const auto deriv = [&](double f) { return obj.derivatives(f); };
  return detail::minimize_on(obj, deriv, true, lo, hi, clamp,
                             std::max(window.f_min(), fk),
                             SolveMethod::NumericQuad);
}

// ---- closed forms --------------------------------------------------------

/// Real roots of c3 x^3 + c2 x^2 + c1 x + c0 = 0, Newton-polished.
/// Degenerates gracefully to the quadratic and linear cases.
inline std::vector<double> solve_cubic_real(double c3, double c2, double c1,
                                            double c0) {
  std::vector<double> roots;
  if (c3 == 0.0) {
    if (c2 == 0.0) {
      if (c1 != 0.0) roots.push_back(-c0 / c1);
      return roots;
    }
    const double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    roots.push_back((-c1 + sq) / (2.0 * c2));
    roots.push_back((-c1 - sq) / (2.0 * c2));
  } else {
    // Depressed form x = t - a2/3: t^3 + p t + q = 0.
    const double a2 = c2 / c3, a1 = c1 / c3, a0 = c0 / c3;
    const double p = a1 - a2 * a2 / 3.0;
    const double q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    const double disc = q * q / 4.0 + p * p * p / 27.0;
    const double shift = a2 / 3.0;
    if (disc > 0.0) {
      const double sq = std::sqrt(disc);
      const double u = std::cbrt(-q / 2.0 + sq);
      const double v = std::cbrt(-q / 2.0 - sq);
      roots.push_back(u + v - shift);
    } else if (p == 0.0) {
      roots.push_back(std::cbrt(-q) - shift);
    } else {
      constexpr double pi = 3.14159265358979323846;
      const double r = 2.0 * std::sqrt(-p / 3.0);
      const double arg =
          std::clamp(3.0 * q / (p * r), -1.0, 1.0);  // = cos(3 theta)
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k)
        roots.push_back(r * std::cos(theta - 2.0 * pi * k / 3.0) - shift);
    }
  }
  for (double& x : roots) {
    for (int i = 0; i < 3; ++i) {
      const double fx = ((c3 * x + c2) * x + c1) * x + c0;
      const double dfx = (3.0 * c3 * x + 2.0 * c2) * x + c1;
      if (dfx == 0.0) break;
      x -= fx / dfx;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

/// Stationary point of (k f^2 + l f + m + p_static)/(f - f_k), the
/// beta = 0 objective: f_opt = f_k + sqrt(k^2 f_k^2 + k (m + p_static +
/// f_k l)) / k. The radicand is, up to the positive factor k, the same
/// expression whose sign settles the second-order condition, so a
/// negative radicand means there is no interior minimum.
inline double fopt_beta_zero(const QuadApprox& q, double f_k, double p_static) {
  detail::require(std::isfinite(f_k) && f_k >= 0.0,
                  "fopt_beta_zero: f_k must be >= 0");
  const double k = q.k();
  const double radicand =
      k * k * f_k * f_k + k * (q.m() + p_static + f_k * q.l());
  if (!(radicand >= 0.0))
    throw no_interior_optimum_error(
        "beta=0 closed form: negative radicand, no interior optimum");
  return f_k + std::sqrt(radicand) / k;
}

/// f_k = 0 special case: sqrt((m + p_static)/k), valid while m + p_static
/// is positive.
inline double fopt_no_thieves(const QuadApprox& q, double p_static) {
  const double num = q.m() + p_static;
  if (!(num > 0.0))
    throw no_interior_optimum_error(
        "f_k=0 closed form: m + p_static must be > 0 (got " +
        detail::num(num) + ")");
  return std::sqrt(num / q.k());
}

/// Analytic minimizer of the quadratic-approximation objective. For
/// beta > 0 the first-order condition is the cubic
///   2 k b f^3 + (k + b(l - 4 f_k k)) f^2 + (2 f_k b (f_k k - l) - 2 f_k k) f
///     - (m + P + f_k l (1 - b f_k)) = 0,
/// solved in closed form; among real roots above f_k satisfying the
/// second-order condition the one with the lowest objective wins. beta = 0
/// and f_k = 0 fall back to their closed forms; beta < 0 is outside the
/// closed-form derivation and is delegated to the numeric search.
inline FoptResult find_fopt_cubic(const QuadApprox& q,
                                  const ExecTimeParams& time, double p_drop,
                                  double p_back) {
  const double fk = time.f_k();
  const double beta = time.beta();
  const double P = p_drop + p_back;
  const detail::QuadObjective obj{q.k(), q.l(), q.m(), P, fk, beta};

  if (beta < 0.0) {
    FrequencyWindow wide(1e-3, detail::kUnclampedCap);
    return find_fopt_numeric(q, time, p_drop, p_back, wide, /*clamp=*/false);
  }
  if (beta == 0.0) {
    const bool thieves = fk > 0.0;
    const double f = thieves ? fopt_beta_zero(q, fk, P)
                             : fopt_no_thieves(q, P);
    return FoptResult{f, ClampStatus::Unclamped, obj(f),
                      thieves ? SolveMethod::BetaZero : SolveMethod::FkZero};
  }

  const double k = q.k(), l = q.l(), m = q.m();
  const double c3 = 2.0 * k * beta;
  const double c2 = k + beta * (l - 4.0 * fk * k);
  const double c1 = 2.0 * fk * beta * (fk * k - l) - 2.0 * fk * k;
  const double c0 = -(m + P + fk * l * (1.0 - beta * fk));

  std::optional<double> best;
  for (double root : solve_cubic_real(c3, c2, c1, c0)) {
    if (!(root > fk)) continue;
    const auto [d1, d2] = obj.derivatives(root);
    (void)d1;
    if (!(d2 >= 0.0)) continue;
    if (!best || obj(root) < obj(*best)) best = root;
  }
  if (!best)
    throw no_interior_optimum_error(
        "cubic closed form: no admissible real root above f_k; minimum lies "
        "on the window boundary");
  return FoptResult{*best, ClampStatus::Unclamped, obj(*best),
                    SolveMethod::Cubic};
}

// ---- convexity -----------------------------------------------------------

struct ConvexityReport {
  double min_second_derivative;
  double argmin_second_derivative;  // frequency of the minimum above
  int chord_trials;
  int chord_violations;
  // Set for f_k ~ 0 scenarios with polynomial power: true when every term
  // of the second-derivative expression is nonnegative by its sign alone,
  // which already guarantees convexity without sampling.
  std::optional<bool> sign_guaranteed;

  bool convex() const noexcept {
    return min_second_derivative > 0.0 && chord_violations == 0;
  }
};

namespace detail {

template <class F, class D>
ConvexityReport convexity_scan(F&& value, D&& second_deriv, double lo,
                               double hi,
                               std::optional<bool> sign_guaranteed) {
  constexpr int grid_points = 1024;
  constexpr int chord_trials = 1000;
  ConvexityReport report{};
  report.sign_guaranteed = sign_guaranteed;
  report.min_second_derivative = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double f = lo + (i + 0.5) * (hi - lo) / grid_points;
    const double d2 = second_deriv(f);
    if (d2 < report.min_second_derivative) {
      report.min_second_derivative = d2;
      report.argmin_second_derivative = f;
    }
  }
  std::mt19937 rng(0x9e3779b9u);
  std::uniform_real_distribution<double> uf(lo + 1e-6 * (hi - lo), hi);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  report.chord_trials = chord_trials;
  for (int i = 0; i < chord_trials; ++i) {
    double f1 = uf(rng), f2 = uf(rng);
    if (std::abs(f1 - f2) < 1e-9) {
      --i;
      continue;
    }
    double t = ut(rng);
    if (t <= 0.0 || t >= 1.0) {
      --i;
      continue;
    }
    const double blend = t * value(f1) + (1.0 - t) * value(f2);
    const double mid = value(t * f1 + (1.0 - t) * f2);
    if (mid - blend > 1e-9 * std::max(1.0, std::abs(blend)))
      ++report.chord_violations;
  }
  return report;
}

}  // namespace detail

/// Samples the second derivative over the exploitable window, runs random
/// chord tests of the convexity definition, and reports whether the
/// second-order expression is nonnegative by signs alone (f_k ~ 0 case).
inline ConvexityReport check_convexity(const Scenario& s,
                                       bool include_back = true) {
  const double lo = s.exploitable_min();
  const double hi = s.exploitable_max();
  const bool affine = s.vmap().is_affine();

  std::optional<bool> sign_guaranteed;
  if (affine && s.time().f_k() <= 1e-9) {
    const QuarticCoeffs q = quartic_coeffs(s.cpu(), s.vmap());
    sign_guaranteed = s.time().beta() >= 0.0 && q.a >= 0.0 && q.b >= 0.0 &&
                      q.c >= 0.0 && q.d >= 0.0;
  }

  const auto value = [&](double f) {
    return normalized_energy(s, f, include_back);
  };
  const auto d2 = [&](double f) {
    if (affine) return energy_derivatives(s, f, include_back).second;
    const double h = 1e-4;
    return (value(f + h) - 2.0 * value(f) + value(f - h)) / (h * h);
  };
  return detail::convexity_scan(value, d2, lo, hi, sign_guaranteed);
}

/// Convexity scan of the quadratic-approximation objective.
inline ConvexityReport check_convexity(const QuadApprox& q,
                                       const ExecTimeParams& time,
                                       double p_drop, double p_back,
                                       const FrequencyWindow& window) {
  const detail::QuadObjective obj{q.k(),  q.l(), q.m(), p_drop + p_back,
                                  time.f_k(), time.beta()};
  const double lo = std::max(window.f_min(), time.f_k());
  const double hi = window.f_max();
  detail::require(hi > lo, "convexity: empty window");
  std::optional<bool> sign_guaranteed;
  if (time.f_k() <= 1e-9)
    sign_guaranteed = time.beta() >= 0.0 && q.l() >= 0.0 &&
                      q.m() + p_drop + p_back >= 0.0;
  return detail::convexity_scan(
      obj, [&](double f) { return obj.derivatives(f).second; }, lo, hi,
      sign_guaranteed);
}

}  // namespace enopt
