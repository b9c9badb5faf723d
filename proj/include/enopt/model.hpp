#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "enopt/errors.hpp"

// Core energy model for a single microprocessor in a larger system.
//
// Canonical units throughout: frequency in GHz, voltage in V, power in W,
// program size cc_b in giga-cycles, per-cycle slack beta in ns/cycle.
// With these choices execution time comes out in seconds and energy in
// joules; normalized energy is in joules per giga-cycle.

namespace enopt {

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw validation_error(msg);
}

inline std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace detail

/// One (frequency, voltage) node of a DVFS operating-point table.
struct VoltagePoint {
  double f_ghz;
  double volts;
};

struct AffineVoltageMap {
  double m1;  // volts per GHz
  double m2;  // volts
};

/// Supply voltage as a function of clock frequency. Either an affine law
/// V = m1*f + m2 or a table of measured DVFS nodes interpolated linearly.
/// Table maps never extrapolate.
class VoltageFreqMap {
public:
  static VoltageFreqMap affine(double m1, double m2) {
    detail::require(std::isfinite(m1) && std::isfinite(m2),
                    "voltage_map.affine: coefficients must be finite");
    detail::require(m1 >= 0.0, "voltage_map.affine: m1 must be >= 0 (got " +
                                   detail::num(m1) + ")");
    detail::require(m2 >= 0.0, "voltage_map.affine: m2 must be >= 0 (got " +
                                   detail::num(m2) + ")");
    return VoltageFreqMap(AffineVoltageMap{m1, m2});
  }

  static VoltageFreqMap table(std::vector<VoltagePoint> rows) {
    detail::require(rows.size() >= 2,
                    "voltage_map.table: needs at least 2 rows (got " +
                        std::to_string(rows.size()) + ")");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::require(std::isfinite(rows[i].f_ghz) && rows[i].f_ghz > 0.0,
                      "voltage_map.table: row " + std::to_string(i) +
                          ": frequency must be > 0");
      detail::require(std::isfinite(rows[i].volts) && rows[i].volts > 0.0,
                      "voltage_map.table: row " + std::to_string(i) +
                          ": voltage must be > 0");
      if (i > 0) {
        detail::require(rows[i].f_ghz > rows[i - 1].f_ghz,
                        "voltage_map.table: frequencies must be strictly "
                        "increasing at row " +
                            std::to_string(i));
        detail::require(rows[i].volts >= rows[i - 1].volts,
                        "voltage_map.table: voltages must be non-decreasing "
                        "at row " +
                            std::to_string(i));
      }
    }
    return VoltageFreqMap(std::move(rows));
  }

  bool is_affine() const noexcept {
    return std::holds_alternative<AffineVoltageMap>(rep_);
  }

  const AffineVoltageMap& affine_coeffs() const {
    if (!is_affine())
      throw unsupported_map_error(
          "operation requires an affine voltage map, got a table map");
    return std::get<AffineVoltageMap>(rep_);
  }

  const std::vector<VoltagePoint>& table_rows() const {
    if (is_affine())
      throw unsupported_map_error("voltage map is affine, not a table");
    return std::get<std::vector<VoltagePoint>>(rep_);
  }

  /// Frequency range the map is defined on. Affine maps cover all f > 0.
  double min_freq() const noexcept {
    return is_affine() ? 0.0
                       : std::get<std::vector<VoltagePoint>>(rep_).front().f_ghz;
  }
  double max_freq() const noexcept {
    return is_affine()
               ? std::numeric_limits<double>::infinity()
               : std::get<std::vector<VoltagePoint>>(rep_).back().f_ghz;
  }

private:
  explicit VoltageFreqMap(AffineVoltageMap a) : rep_(a) {}
  explicit VoltageFreqMap(std::vector<VoltagePoint> t) : rep_(std::move(t)) {}

  std::variant<AffineVoltageMap, std::vector<VoltagePoint>> rep_;
};

/// Microprocessor power coefficients: xi scales dynamic power
/// [W/(GHz*V^2)], gamma scales the voltage-dependent leakage [1/V].
class CpuPowerParams {
public:
  CpuPowerParams(double xi, double gamma) : xi_(xi), gamma_(gamma) {
    detail::require(std::isfinite(xi) && xi > 0.0,
                    "cpu.xi must be > 0 (got " + detail::num(xi) + ")");
    detail::require(std::isfinite(gamma) && gamma >= 0.0,
                    "cpu.gamma must be >= 0 (got " + detail::num(gamma) + ")");
  }
  double xi() const noexcept { return xi_; }
  double gamma() const noexcept { return gamma_; }

private:
  double xi_;
  double gamma_;
};

/// Coefficients of P_cpu = a f^4 + b f^3 + c f^2 + d f, obtained by
/// substituting an affine voltage law into the power model.
struct QuarticCoeffs {
  double a;  // W/GHz^4
  double b;  // W/GHz^3
  double c;  // W/GHz^2
  double d;  // W/GHz
};

/// Execution-time model: cc_b giga-cycles of user work, f_k GHz stolen by
/// higher-priority activity, beta ns of stall per cycle. beta may be
/// negative (fits produce such values); whether the per-cycle time stays
/// positive is checked against a concrete window when a Scenario is built.
class ExecTimeParams {
public:
  ExecTimeParams(double cc_b, double f_k, double beta)
      : cc_b_(cc_b), f_k_(f_k), beta_(beta) {
    detail::require(std::isfinite(cc_b) && cc_b > 0.0,
                    "time.cc_b must be > 0 (got " + detail::num(cc_b) + ")");
    detail::require(std::isfinite(f_k) && f_k >= 0.0,
                    "time.f_k must be >= 0 (got " + detail::num(f_k) + ")");
    detail::require(std::isfinite(beta), "time.beta must be finite");
  }
  double cc_b() const noexcept { return cc_b_; }
  double f_k() const noexcept { return f_k_; }
  double beta() const noexcept { return beta_; }

private:
  double cc_b_;
  double f_k_;
  double beta_;
};

/// System power drawn besides the microprocessor: p_drop is gateable by
/// the processor, p_back is always present.
class StaticPower {
public:
  StaticPower(double p_drop, double p_back) : p_drop_(p_drop), p_back_(p_back) {
    detail::require(std::isfinite(p_drop) && p_drop >= 0.0,
                    "power.p_drop must be >= 0 (got " + detail::num(p_drop) + ")");
    detail::require(std::isfinite(p_back) && p_back >= 0.0,
                    "power.p_back must be >= 0 (got " + detail::num(p_back) + ")");
  }
  double p_drop() const noexcept { return p_drop_; }
  double p_back() const noexcept { return p_back_; }
  double total() const noexcept { return p_drop_ + p_back_; }

private:
  double p_drop_;
  double p_back_;
};

/// Hardware clock frequency window [f_min, f_max].
class FrequencyWindow {
public:
  FrequencyWindow(double f_min, double f_max) : f_min_(f_min), f_max_(f_max) {
    detail::require(std::isfinite(f_min) && f_min > 0.0,
                    "window.f_min must be > 0 (got " + detail::num(f_min) + ")");
    detail::require(std::isfinite(f_max) && f_max > f_min,
                    "window.f_max must be > f_min (got f_min=" +
                        detail::num(f_min) + ", f_max=" + detail::num(f_max) +
                        ")");
  }
  double f_min() const noexcept { return f_min_; }
  double f_max() const noexcept { return f_max_; }

private:
  double f_min_;
  double f_max_;
};

/// Complete parameterization of one system. Construction validates the
/// cross-cutting invariants:
///   - the exploitable window [max(f_min, f_k), f_max] is non-empty,
///   - the per-cycle time 1/(f - f_k) + beta stays positive on it,
///   - a table voltage map covers the whole window.
class Scenario {
public:
  Scenario(VoltageFreqMap vmap, CpuPowerParams cpu, ExecTimeParams time,
           StaticPower static_power, FrequencyWindow window)
      : vmap_(std::move(vmap)),
        cpu_(cpu),
        time_(time),
        static_power_(static_power),
        window_(window) {
    detail::require(time_.f_k() < window_.f_max(),
                    "scenario: f_k=" + detail::num(time_.f_k()) +
                        " leaves an empty exploitable window (f_max=" +
                        detail::num(window_.f_max()) + ")");
    // With beta < 0 the per-cycle time is smallest at f_max.
    const double worst = 1.0 / (window_.f_max() - time_.f_k()) + time_.beta();
    detail::require(worst > 0.0,
                    "scenario: per-cycle time is not positive at f_max (beta=" +
                        detail::num(time_.beta()) + ")");
    if (!vmap_.is_affine()) {
      detail::require(
          vmap_.min_freq() <= exploitable_min() &&
              vmap_.max_freq() >= window_.f_max(),
          "scenario: voltage table [" + detail::num(vmap_.min_freq()) + ", " +
              detail::num(vmap_.max_freq()) +
              "] does not cover the exploitable window");
    }
  }

  const VoltageFreqMap& vmap() const noexcept { return vmap_; }
  const CpuPowerParams& cpu() const noexcept { return cpu_; }
  const ExecTimeParams& time() const noexcept { return time_; }
  const StaticPower& static_power() const noexcept { return static_power_; }
  const FrequencyWindow& window() const noexcept { return window_; }

  /// Lower bound of the exploitable window, max(f_min, f_k).
  double exploitable_min() const noexcept {
    return std::max(window_.f_min(), time_.f_k());
  }
  double exploitable_max() const noexcept { return window_.f_max(); }

private:
  VoltageFreqMap vmap_;
  CpuPowerParams cpu_;
  ExecTimeParams time_;
  StaticPower static_power_;
  FrequencyWindow window_;
};

/// One slice of a workload executed under a fixed configuration.
struct Quantum {
  Scenario scenario;
  double f_ghz;
};

/// Ordered run of quanta; each frequency must lie in its scenario's
/// exploitable window (strictly above f_k).
class QuantaSequence {
public:
  explicit QuantaSequence(std::vector<Quantum> quanta)
      : quanta_(std::move(quanta)) {
    detail::require(!quanta_.empty(), "quanta sequence must be non-empty");
    for (std::size_t i = 0; i < quanta_.size(); ++i) {
      const Quantum& q = quanta_[i];
      const bool inside = q.f_ghz > q.scenario.time().f_k() &&
                          q.f_ghz >= q.scenario.exploitable_min() &&
                          q.f_ghz <= q.scenario.exploitable_max();
      detail::require(inside, "quantum " + std::to_string(i) + ": f=" +
                                  detail::num(q.f_ghz) +
                                  " outside the exploitable window [" +
                                  detail::num(q.scenario.exploitable_min()) +
                                  ", " +
                                  detail::num(q.scenario.exploitable_max()) +
                                  "]");
    }
  }

  const std::vector<Quantum>& quanta() const noexcept { return quanta_; }

private:
  std::vector<Quantum> quanta_;
};

// ---- operations -----------------------------------------------------------

/// Supply voltage at f. Table maps interpolate linearly between the
/// bracketing nodes and refuse to extrapolate.
inline double voltage_at(const VoltageFreqMap& vmap, double f_ghz) {
  if (!(std::isfinite(f_ghz) && f_ghz > 0.0))
    throw domain_error("voltage_at: f must be > 0 (got " + detail::num(f_ghz) +
                       ")");
  if (vmap.is_affine()) {
    const AffineVoltageMap& a = vmap.affine_coeffs();
    return a.m1 * f_ghz + a.m2;
  }
  const std::vector<VoltagePoint>& rows = vmap.table_rows();
  if (f_ghz < rows.front().f_ghz || f_ghz > rows.back().f_ghz)
    throw domain_error("voltage_at: f=" + detail::num(f_ghz) +
                       " outside table range [" +
                       detail::num(rows.front().f_ghz) + ", " +
                       detail::num(rows.back().f_ghz) + "]");
  auto hi = std::lower_bound(
      rows.begin(), rows.end(), f_ghz,
      [](const VoltagePoint& p, double f) { return p.f_ghz < f; });
  if (hi->f_ghz == f_ghz) return hi->volts;  // exact at nodes
  auto lo = hi - 1;
  const double t = (f_ghz - lo->f_ghz) / (hi->f_ghz - lo->f_ghz);
  return lo->volts + t * (hi->volts - lo->volts);
}

/// Microprocessor power (1 + gamma*V) * xi * f * V^2 in watts.
inline double cpu_power(const CpuPowerParams& cpu, const VoltageFreqMap& vmap,
                        double f_ghz) {
  const double v = voltage_at(vmap, f_ghz);
  return (1.0 + cpu.gamma() * v) * cpu.xi() * f_ghz * v * v;
}

/// Expands the power model over an affine voltage law into quartic
/// polynomial coefficients. Table maps have no such closed form.
inline QuarticCoeffs quartic_coeffs(const CpuPowerParams& cpu,
                                    const VoltageFreqMap& vmap) {
  const AffineVoltageMap& m = vmap.affine_coeffs();
  const double xi = cpu.xi();
  const double g = cpu.gamma();
  return QuarticCoeffs{
      g * xi * m.m1 * m.m1 * m.m1,
      m.m1 * m.m1 * xi * (1.0 + 3.0 * g * m.m2),
      m.m1 * m.m2 * xi * (3.0 * g * m.m2 + 2.0),
      m.m2 * m.m2 * xi * (g * m.m2 + 1.0),
  };
}

/// a f^4 + b f^3 + c f^2 + d f.
inline double quartic_eval(const QuarticCoeffs& q, double f) {
  return f * (q.d + f * (q.c + f * (q.b + f * q.a)));
}

/// Per-cycle execution time 1/(f - f_k) + beta in ns/cycle.
inline double per_cycle_time(const ExecTimeParams& time, double f_ghz) {
  if (!(f_ghz > time.f_k()))
    throw domain_error("exec_time: undefined for f=" + detail::num(f_ghz) +
                       " <= f_k=" + detail::num(time.f_k()));
  const double t = 1.0 / (f_ghz - time.f_k()) + time.beta();
  if (!(t > 0.0))
    throw domain_error("exec_time: model violation, per-cycle time " +
                       detail::num(t) + " ns at f=" + detail::num(f_ghz));
  return t;
}

/// Execution time cc_b * (1/(f - f_k) + beta) in seconds.
inline double exec_time(const ExecTimeParams& time, double f_ghz) {
  return time.cc_b() * per_cycle_time(time, f_ghz);
}

/// Whole-system power P_cpu + P_drop + P_back in watts.
inline double system_power(const Scenario& s, double f_ghz) {
  return cpu_power(s.cpu(), s.vmap(), f_ghz) + s.static_power().total();
}

/// System energy (P_cpu + P_drop + P_back) * dt in joules.
inline double system_energy(const Scenario& s, double f_ghz) {
  return system_power(s, f_ghz) * exec_time(s.time(), f_ghz);
}

/// Energy per giga-cycle of user work. With include_back (the default,
/// and what the solvers optimize) the background power is part of the
/// objective: (P_cpu + P_drop + P_back) * (1/(f-f_k) + beta). Without it
/// the background term is subtracted out: (E_sys - P_back*dt) / cc_b.
inline double normalized_energy(const Scenario& s, double f_ghz,
                                bool include_back = true) {
  const double p = cpu_power(s.cpu(), s.vmap(), f_ghz) +
                   s.static_power().p_drop() +
                   (include_back ? s.static_power().p_back() : 0.0);
  return p * per_cycle_time(s.time(), f_ghz);
}

/// Normalized energy split into the slack-scaled polynomial part and the
/// cycle-time part; the two sum to normalized_energy(s, f).
struct EnergySplit {
  double slack_energy;  // (quartic + static) * beta
  double cycle_energy;  // (quartic + static) / (f - f_k)
};

inline EnergySplit energy_split(const Scenario& s, double f_ghz) {
  const QuarticCoeffs q = quartic_coeffs(s.cpu(), s.vmap());
  if (!(f_ghz > s.time().f_k()))
    throw domain_error("energy_split: f=" + detail::num(f_ghz) +
                       " <= f_k=" + detail::num(s.time().f_k()));
  const double poly = quartic_eval(q, f_ghz) + s.static_power().total();
  return EnergySplit{poly * s.time().beta(),
                     poly / (f_ghz - s.time().f_k())};
}

struct EnergyDerivatives {
  double first;   // J/(Gcycle*GHz)
  double second;  // J/(Gcycle*GHz^2)
};

/// Closed-form first and second derivatives of the normalized energy
/// with respect to f (affine voltage maps only).
inline EnergyDerivatives energy_derivatives(const Scenario& s, double f_ghz,
                                            bool include_back = true) {
  const QuarticCoeffs q = quartic_coeffs(s.cpu(), s.vmap());
  const double fk = s.time().f_k();
  const double beta = s.time().beta();
  if (f_ghz == fk)
    throw domain_error("energy_derivatives: singular at f = f_k = " +
                       detail::num(fk));
  if (!(f_ghz > fk))
    throw domain_error("energy_derivatives: f=" + detail::num(f_ghz) +
                       " <= f_k=" + detail::num(fk));
  const double p = s.static_power().p_drop() +
                   (include_back ? s.static_power().p_back() : 0.0);
  const double f = f_ghz;
  const double f2 = f * f, f3 = f2 * f, f4 = f3 * f;
  const double den = f - fk;

  const double d1_slack = (4.0 * q.a * f3 + 3.0 * q.b * f2 + 2.0 * q.c * f +
                           q.d) * beta;
  const double d1_cycle =
      (3.0 * q.a * f4 + (2.0 * q.b - 4.0 * q.a * fk) * f3 +
       (q.c - 3.0 * q.b * fk) * f2 - 2.0 * q.c * fk * f - (p + q.d * fk)) /
      (den * den);

  const double d2_slack = (12.0 * q.a * f2 + 6.0 * q.b * f + 2.0 * q.c) * beta;
  const double d2_cycle =
      (6.0 * q.a * f4 + (2.0 * q.b - 16.0 * q.a * fk) * f3 +
       (12.0 * q.a * fk * fk - 6.0 * q.b * fk) * f2 +
       6.0 * q.b * fk * fk * f +
       2.0 * (p + q.c * fk * fk + q.d * fk)) /
      (den * den * den);

  return EnergyDerivatives{d1_slack + d1_cycle, d2_slack + d2_cycle};
}

struct SequenceEnergy {
  double energy_j;
  double time_s;
};

/// Total energy and time of a run: sum of per-quantum contributions.
inline SequenceEnergy sequence_energy(const QuantaSequence& seq) {
  SequenceEnergy total{0.0, 0.0};
  for (const Quantum& q : seq.quanta()) {
    total.energy_j += system_energy(q.scenario, q.f_ghz);
    total.time_s += exec_time(q.scenario.time(), q.f_ghz);
  }
  return total;
}

// ---- sampled curves -------------------------------------------------------

/// Inclusive arithmetic grid start, start+step, ..., stop.
struct GridSpec {
  double start;
  double stop;
  double step;

  std::vector<double> values() const {
    detail::require(std::isfinite(start) && std::isfinite(stop) &&
                        std::isfinite(step),
                    "grid: bounds and step must be finite");
    detail::require(step > 0.0, "grid: step must be > 0 (got " +
                                    detail::num(step) + ")");
    detail::require(stop >= start, "grid: stop must be >= start");
    const std::size_t n =
        static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i) * step;
    return v;
  }
};

struct EnergyCurveRow {
  double f_ghz;
  double p_cpu_w;
  double p_sys_w;
  double dt_s;
  double e_sys_j;
  double e_norm;  // J per giga-cycle
};

using EnergyCurve = std::vector<EnergyCurveRow>;

/// Samples power, time and energy over a frequency grid. Every grid point
/// must lie inside the scenario's exploitable window.
inline EnergyCurve sample_energy_curve(const Scenario& s, const GridSpec& grid,
                                       bool include_back = true) {
  EnergyCurve curve;
  for (double f : grid.values()) {
    if (f <= s.time().f_k() || f < s.exploitable_min() ||
        f > s.exploitable_max())
      throw domain_error("energy curve: grid point f=" + detail::num(f) +
                         " outside the exploitable window [" +
                         detail::num(s.exploitable_min()) + ", " +
                         detail::num(s.exploitable_max()) + "]");
    EnergyCurveRow row;
    row.f_ghz = f;
    row.p_cpu_w = cpu_power(s.cpu(), s.vmap(), f);
    row.p_sys_w = row.p_cpu_w + s.static_power().total();
    row.dt_s = exec_time(s.time(), f);
    row.e_sys_j = row.p_sys_w * row.dt_s;
    row.e_norm = normalized_energy(s, f, include_back);
    curve.push_back(row);
  }
  return curve;
}

}  // namespace enopt
