#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "enopt/fitting.hpp"
#include "enopt/model.hpp"

// Scenario documents (JSON, strict schema) and measurement trace files
// (CSV with a required header). Unknown keys and columns are rejected;
// trace errors cite the offending line.

namespace enopt {

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> keys,
                       const std::string& ctx) {
  if (!obj.is_object())
    throw validation_error(ctx + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known)
      throw validation_error(ctx + ": unknown key '" + key + "'");
  }
}

inline double get_number(const json& obj, const char* key,
                         const std::string& ctx) {
  if (!obj.contains(key))
    throw validation_error(ctx + ": missing key '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number())
    throw validation_error(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

inline std::optional<double> parse_double(const std::string& cell) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || end != begin + cell.size()) return std::nullopt;
  return v;
}

inline std::string trim(std::string s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  };
  while (!s.empty() && is_space(s.back())) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  return s.substr(i);
}

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace detail

// ---- scenario documents -------------------------------------------------

inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::check_keys;
  using detail::get_number;
  check_keys(doc, {"voltage_map", "cpu", "time", "power", "window"},
             "scenario");
  for (const char* key : {"voltage_map", "cpu", "time", "power", "window"})
    if (!doc.contains(key))
      throw validation_error(std::string("scenario: missing section '") + key +
                             "'");

  const nlohmann::json& vm = doc.at("voltage_map");
  check_keys(vm, {"affine", "table"}, "voltage_map");
  if (vm.contains("affine") == vm.contains("table"))
    throw validation_error(
        "voltage_map: exactly one of 'affine' or 'table' is required");
  std::optional<VoltageFreqMap> vmap;
  if (vm.contains("affine")) {
    const nlohmann::json& a = vm.at("affine");
    check_keys(a, {"m1", "m2"}, "voltage_map.affine");
    vmap = VoltageFreqMap::affine(get_number(a, "m1", "voltage_map.affine"),
                                  get_number(a, "m2", "voltage_map.affine"));
  } else {
    const nlohmann::json& t = vm.at("table");
    if (!t.is_array())
      throw validation_error("voltage_map.table: expected an array of "
                             "[frequency, voltage] pairs");
    std::vector<VoltagePoint> rows;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const nlohmann::json& row = t.at(i);
      if (!row.is_array() || row.size() != 2 || !row.at(0).is_number() ||
          !row.at(1).is_number())
        throw validation_error("voltage_map.table: row " + std::to_string(i) +
                               " must be a [frequency, voltage] pair");
      rows.push_back({row.at(0).get<double>(), row.at(1).get<double>()});
    }
    vmap = VoltageFreqMap::table(std::move(rows));
  }

  const nlohmann::json& cpu = doc.at("cpu");
  check_keys(cpu, {"xi", "gamma"}, "cpu");
  const nlohmann::json& time = doc.at("time");
  check_keys(time, {"cc_b", "f_k", "beta"}, "time");
  const nlohmann::json& power = doc.at("power");
  check_keys(power, {"p_drop", "p_back"}, "power");
  const nlohmann::json& window = doc.at("window");
  check_keys(window, {"f_min", "f_max"}, "window");

  return Scenario(
      std::move(*vmap),
      CpuPowerParams(get_number(cpu, "xi", "cpu"),
                     get_number(cpu, "gamma", "cpu")),
      ExecTimeParams(get_number(time, "cc_b", "time"),
                     get_number(time, "f_k", "time"),
                     get_number(time, "beta", "time")),
      StaticPower(get_number(power, "p_drop", "power"),
                  get_number(power, "p_back", "power")),
      FrequencyWindow(get_number(window, "f_min", "window"),
                      get_number(window, "f_max", "window")));
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json vm;
  if (s.vmap().is_affine()) {
    const AffineVoltageMap& a = s.vmap().affine_coeffs();
    vm = {{"affine", {{"m1", a.m1}, {"m2", a.m2}}}};
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (const VoltagePoint& p : s.vmap().table_rows())
      rows.push_back({p.f_ghz, p.volts});
    vm = {{"table", rows}};
  }
  return {
      {"voltage_map", vm},
      {"cpu", {{"xi", s.cpu().xi()}, {"gamma", s.cpu().gamma()}}},
      {"time",
       {{"cc_b", s.time().cc_b()},
        {"f_k", s.time().f_k()},
        {"beta", s.time().beta()}}},
      {"power",
       {{"p_drop", s.static_power().p_drop()},
        {"p_back", s.static_power().p_back()}}},
      {"window",
       {{"f_min", s.window().f_min()}, {"f_max", s.window().f_max()}}},
  };
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw validation_error("scenario: cannot open '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw validation_error("scenario: '" + path.string() +
                           "' is not valid JSON: " + e.what());
  }
  return scenario_from_json(doc);
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out)
    throw validation_error("scenario: cannot write '" + path.string() + "'");
  out << scenario_to_json(s).dump(2) << "\n";
}

// ---- trace files ----------------------------------------------------------

/// Parses a comma-delimited trace with header columns freq_ghz, value and
/// optional voltage_v (any order). Duplicate frequencies are fine; these
/// are repeated measurements.
inline std::vector<TraceSample> parse_traces(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw validation_error("traces: empty file, header row required");
  const std::vector<std::string> header = detail::split_csv(line);
  int col_f = -1, col_value = -1, col_voltage = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "freq_ghz") col_f = static_cast<int>(i);
    else if (header[i] == "value") col_value = static_cast<int>(i);
    else if (header[i] == "voltage_v") col_voltage = static_cast<int>(i);
    else
      throw validation_error("traces: unknown column '" + header[i] + "'");
  }
  if (col_f < 0) throw validation_error("traces: missing column freq_ghz");
  if (col_value < 0) throw validation_error("traces: missing column value");

  std::vector<TraceSample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv(line);
    if (cells.size() != header.size())
      throw validation_error("traces: line " + std::to_string(line_no) +
                             ": expected " + std::to_string(header.size()) +
                             " cells, got " + std::to_string(cells.size()));
    const auto cell_number = [&](int col, const char* name) {
      const std::optional<double> v = detail::parse_double(cells[col]);
      if (!v || !std::isfinite(*v))
        throw validation_error("traces: line " + std::to_string(line_no) +
                               ": " + name + " is not a finite number ('" +
                               cells[col] + "')");
      return *v;
    };
    TraceSample s;
    s.f_ghz = cell_number(col_f, "freq_ghz");
    s.value = cell_number(col_value, "value");
    if (!(s.f_ghz > 0.0))
      throw validation_error("traces: line " + std::to_string(line_no) +
                             ": freq_ghz must be > 0 (got " +
                             detail::num(s.f_ghz) + ")");
    if (!(s.value > 0.0))
      throw validation_error("traces: line " + std::to_string(line_no) +
                             ": value must be > 0 (got " +
                             detail::num(s.value) + ")");
    if (col_voltage >= 0) {
      s.voltage_v = cell_number(col_voltage, "voltage_v");
      if (!(*s.voltage_v > 0.0))
        throw validation_error("traces: line " + std::to_string(line_no) +
                               ": voltage_v must be > 0 (got " +
                               detail::num(*s.voltage_v) + ")");
    }
    samples.push_back(s);
  }
  return samples;
}

inline std::vector<TraceSample> load_traces(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in)
    throw validation_error("traces: cannot open '" + path.string() + "'");
  return parse_traces(in);
}

}  // namespace enopt
