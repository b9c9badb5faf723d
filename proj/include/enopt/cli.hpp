#pragma once

#include <algorithm>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "enopt/fitting.hpp"
#include "enopt/model.hpp"
#include "enopt/scenario_io.hpp"
#include "enopt/sensitivity.hpp"
#include "enopt/solver.hpp"
#include "enopt/strategy.hpp"
#include "enopt/tabular.hpp"

// Command-line surface. Exit codes: 0 success, 2 for invalid input
// (unknown flags, malformed files, violated invariants), 1 for runtime
// failures inside a computation.

namespace enopt {

namespace detail {

inline GridSpec parse_grid(const std::string& text, const char* flag) {
  const auto bad = [&] {
    return validation_error(std::string(flag) + ": expected START:STOP:STEP, got '" +
                            text + "'");
  };
  const std::size_t c1 = text.find(':');
  const std::size_t c2 = text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) throw bad();
  const auto a = parse_double(text.substr(0, c1));
  const auto b = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
  const auto c = parse_double(text.substr(c2 + 1));
  if (!a || !b || !c) throw bad();
  GridSpec grid{*a, *b, *c};
  grid.values();  // validate now so bad grids exit 2 with a clear message
  return grid;
}

inline Cell clamp_cell(const SweepCell& cell) {
  return Cell::token(cell.valid ? std::string(to_string(cell.clamped)) : "gap");
}

}  // namespace detail

/// Runs one CLI invocation. args holds the arguments without the program
/// name, in natural order.
inline int run_command(std::vector<std::string> args, std::ostream& out,
                       std::ostream& err) {
  CLI::App app{"Energy model and optimal-frequency toolkit for DVFS systems"};
  app.require_subcommand(1);

  std::string scenario_path, input_path, format_name = "text";
  std::string grid_text, range_text, range2_text, param_name, param2_name;
  bool no_clamp = false, clamp_sweep = false;
  bool include_back = true;

  const auto add_format = [&](CLI::App* cmd) {
    cmd->add_option("--format", format_name, "Output format")
        ->check(CLI::IsMember({"text", "csv", "json"}));
  };
  const auto add_include_back = [&](CLI::App* cmd) {
    cmd->add_option("--include-back", include_back,
                    "Keep background power inside the optimized objective");
  };

  CLI::App* curve = app.add_subcommand(
      "energy-curve", "Sample power, time and energy over a frequency grid");
  curve->add_option("--scenario", scenario_path, "Scenario file")->required();
  curve->add_option("--grid", grid_text, "Frequency grid START:STOP:STEP")
      ->required();
  add_format(curve);
  add_include_back(curve);

  CLI::App* fopt = app.add_subcommand(
      "fopt", "Find the energy-minimizing clock frequency");
  fopt->add_option("--scenario", scenario_path, "Scenario file")->required();
  fopt->add_flag("--no-clamp", no_clamp,
                 "Search past the window to expose exterior optima");
  add_format(fopt);
  add_include_back(fopt);

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "Re-solve for f_opt over a one- or two-parameter grid");
  sweep_cmd->add_option("--scenario", scenario_path, "Scenario file")
      ->required();
  sweep_cmd->add_option("--param", param_name, "Swept parameter")->required();
  sweep_cmd->add_option("--range", range_text, "START:STOP:STEP")->required();
  sweep_cmd->add_option("--param2", param2_name, "Second swept parameter");
  sweep_cmd->add_option("--range2", range2_text, "START:STOP:STEP");
  CLI::Option* clamp_opt = sweep_cmd->add_flag(
      "--clamp", clamp_sweep, "Pin each optimum to the exploitable window");
  sweep_cmd
      ->add_flag("--no-clamp", no_clamp,
                 "Keep exterior optima visible (default)")
      ->excludes(clamp_opt);
  add_format(sweep_cmd);
  add_include_back(sweep_cmd);

  CLI::App* fit_vmap = app.add_subcommand(
      "fit-vmap", "Fit an affine voltage/frequency law to trace data");
  fit_vmap->add_option("--input", input_path, "Trace file (value = volts)")
      ->required();
  add_format(fit_vmap);

  CLI::App* fit_power = app.add_subcommand(
      "fit-power", "Fit microprocessor power parameters to trace data");
  fit_power->add_option("--input", input_path,
                        "Trace file (value = watts, voltage_v required)")
      ->required();
  add_format(fit_power);

  CLI::App* fit_time = app.add_subcommand(
      "fit-time", "Fit execution-time parameters to trace data");
  fit_time->add_option("--input", input_path, "Trace file (value = seconds)")
      ->required();
  add_format(fit_time);

  CLI::App* recommend = app.add_subcommand(
      "recommend", "Classify the scenario and price the candidate policies");
  recommend->add_option("--scenario", scenario_path, "Scenario file")
      ->required();
  add_format(recommend);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    const OutputFormat fmt = output_format_from_name(format_name);

    if (curve->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const GridSpec grid = detail::parse_grid(grid_text, "--grid");
      const EnergyCurve c = sample_energy_curve(s, grid, include_back);
      Table table;
      table.columns = {"f_ghz", "p_cpu_w", "p_sys_w", "dt_s", "e_sys_j",
                       "e_norm"};
      for (const EnergyCurveRow& row : c)
        table.rows.push_back({Cell::number(row.f_ghz), Cell::number(row.p_cpu_w),
                              Cell::number(row.p_sys_w), Cell::number(row.dt_s),
                              Cell::number(row.e_sys_j),
                              Cell::number(row.e_norm)});
      table.write(out, fmt);
    } else if (fopt->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const FoptResult r = find_fopt_numeric(s, !no_clamp, include_back);
      Record rec;
      rec.add("f_opt_ghz", Cell::number(r.f_opt));
      rec.add("clamped", Cell::token(std::string(to_string(r.clamped))));
      rec.add("method", Cell::token(std::string(to_string(r.method))));
      rec.add("e_min", Cell::number(r.e_min));
      rec.write(out, fmt);
    } else if (sweep_cmd->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      SweepSpec spec;
      spec.param = sweep_param_from_name(param_name);
      spec.range = detail::parse_grid(range_text, "--range");
      if (!param2_name.empty() != !range2_text.empty())
        throw validation_error("sweep: --param2 and --range2 go together");
      if (!param2_name.empty()) {
        spec.param2 = sweep_param_from_name(param2_name);
        spec.range2 = detail::parse_grid(range2_text, "--range2");
      }
      spec.clamp = clamp_sweep;
      spec.include_back = include_back;
      const SweepGrid grid = sweep(s, spec);
      Table table;
      table.columns = {"param1", "param2", "f_opt_ghz", "clamped", "ratio"};
      for (std::size_t i2 = 0; i2 < grid.n2(); ++i2) {
        for (std::size_t i1 = 0; i1 < grid.n1(); ++i1) {
          const SweepCell& cell = grid.at(i1, i2);
          table.rows.push_back(
              {Cell::number(grid.axis1[i1]),
               grid.axis2.empty() ? Cell::empty()
                                  : Cell::number(grid.axis2[i2]),
               Cell::number(cell.f_opt), detail::clamp_cell(cell),
               Cell::number(cell.power_ratio)});
        }
      }
      table.write(out, fmt);
    } else if (fit_vmap->parsed()) {
      std::vector<VoltagePoint> points;
      for (const TraceSample& s : load_traces(input_path))
        points.push_back({s.f_ghz, s.value});
      const VoltageMapFit fit = fit_voltage_map(points);
      const AffineVoltageMap& a = fit.map.affine_coeffs();
      Record rec;
      rec.add("m1", Cell::number(a.m1));
      rec.add("m2", Cell::number(a.m2));
      rec.add("rel_err_p5", Cell::number(fit.report.p5));
      rec.add("rel_err_p50", Cell::number(fit.report.p50));
      rec.add("rel_err_p95", Cell::number(fit.report.p95));
      rec.add("n_samples",
              Cell::number(static_cast<double>(fit.report.residuals.size())));
      rec.write(out, fmt);
    } else if (fit_power->parsed()) {
      const std::vector<TraceSample> samples = load_traces(input_path);
      double lo = samples.empty() ? 0.1 : samples.front().f_ghz, hi = lo;
      for (const TraceSample& s : samples) {
        lo = std::min(lo, s.f_ghz);
        hi = std::max(hi, s.f_ghz);
      }
      const CpuPowerFit fit =
          fit_cpu_power(samples, FrequencyWindow(lo, std::max(hi, lo + 1e-6)));
      Record rec;
      rec.add("xi", Cell::number(fit.params.xi()));
      rec.add("gamma", Cell::number(fit.params.gamma()));
      rec.add("p_static", Cell::number(fit.p_static));
      rec.add("rel_err_p5", Cell::number(fit.report.p5));
      rec.add("rel_err_p50", Cell::number(fit.report.p50));
      rec.add("rel_err_p95", Cell::number(fit.report.p95));
      rec.add("n_samples",
              Cell::number(static_cast<double>(fit.report.residuals.size())));
      rec.write(out, fmt);
    } else if (fit_time->parsed()) {
      const std::vector<TraceSample> samples = load_traces(input_path);
      double lo = samples.empty() ? 0.1 : samples.front().f_ghz, hi = lo;
      for (const TraceSample& s : samples) {
        lo = std::min(lo, s.f_ghz);
        hi = std::max(hi, s.f_ghz);
      }
      const ExecTimeFit fit =
          fit_exec_time(samples, FrequencyWindow(lo, std::max(hi, lo + 1e-6)));
      Record rec;
      rec.add("cc_b", Cell::number(fit.params.cc_b()));
      rec.add("f_k", Cell::number(fit.params.f_k()));
      rec.add("beta", Cell::number(fit.params.beta()));
      rec.add("rel_err_p5", Cell::number(fit.report.p5));
      rec.add("rel_err_p50", Cell::number(fit.report.p50));
      rec.add("rel_err_p95", Cell::number(fit.report.p95));
      rec.add("n_samples",
              Cell::number(static_cast<double>(fit.report.residuals.size())));
      rec.write(out, fmt);
    } else if (recommend->parsed()) {
      const Scenario s = load_scenario(scenario_path);
      const Classification c = classify(s);
      const StrategyCost cost = strategy_cost(s);
      Record rec;
      rec.add("regime", Cell::token(std::string(to_string(c.regime))));
      rec.add("action", Cell::token(std::string(to_string(c.action))));
      rec.add("f_opt_unclamped_ghz", Cell::number(c.f_opt_unclamped));
      rec.add("f_low_ghz", Cell::number(cost.f_low));
      rec.add("f_opt_ghz", Cell::number(cost.f_opt));
      rec.add("f_high_ghz", Cell::number(cost.f_high));
      rec.add("e_low_j", Cell::number(cost.e_low));
      rec.add("e_opt_j", Cell::number(cost.e_opt));
      rec.add("e_high_j", Cell::number(cost.e_high));
      rec.add("best", Cell::token(std::string(to_string(cost.best))));
      rec.add("savings_vs_low_pct", Cell::number(cost.savings_vs_low_pct));
      rec.add("savings_vs_high_pct", Cell::number(cost.savings_vs_high_pct));
      rec.write(out, fmt);
    }
  } catch (const validation_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int run_command(int argc, const char* const* argv, std::ostream& out,
                       std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_command(std::move(args), out, err);
}

}  // namespace enopt
