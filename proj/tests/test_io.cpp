#include <catch2/catch_amalgamated.hpp>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "enopt/cli.hpp"
#include "enopt/scenario_io.hpp"
#include "test_support.hpp"

using namespace enopt;
using testutil::reference_scenario;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("enopt_io_test_" + std::to_string(++counter));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

std::filesystem::path write_file(const TempDir& dir, const std::string& name,
                                 const std::string& content) {
  const std::filesystem::path p = dir.path / name;
  std::ofstream out(p);
  out << content;
  return p;
}

const char* kReferenceScenario = R"({
  "voltage_map": {"affine": {"m1": 0.330, "m2": 0.808}},
  "cpu": {"xi": 0.181, "gamma": 3.137},
  "time": {"cc_b": 1.0, "f_k": 0.0, "beta": 0.0},
  "power": {"p_drop": 0.0, "p_back": 0.5},
  "window": {"f_min": 0.2, "f_max": 1.6}
})";

int run(const std::vector<std::string>& args, std::string* out_text = nullptr,
        std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_command(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::vector<std::string> extract_numerals(const std::string& text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool start = std::isdigit(static_cast<unsigned char>(text[i])) ||
                       (text[i] == '-' && i + 1 < text.size() &&
                        std::isdigit(static_cast<unsigned char>(text[i + 1])));
    if (!start) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[j])) ||
            text[j] == '.' || text[j] == 'e' || text[j] == 'E' ||
            text[j] == '-' || text[j] == '+'))
      ++j;
    out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

TEST_CASE("scenario files round-trip structurally", "[io]") {
  TempDir dir;
  const Scenario original = reference_scenario(0.181, 0.5, 0.13, -0.1, 0.2, 144.359);
  const auto path = dir.path / "ref.scn";
  save_scenario(original, path);
  const Scenario loaded = load_scenario(path);
  CHECK(loaded.vmap().affine_coeffs().m1 == original.vmap().affine_coeffs().m1);
  CHECK(loaded.vmap().affine_coeffs().m2 == original.vmap().affine_coeffs().m2);
  CHECK(loaded.cpu().xi() == original.cpu().xi());
  CHECK(loaded.cpu().gamma() == original.cpu().gamma());
  CHECK(loaded.time().cc_b() == original.time().cc_b());
  CHECK(loaded.time().f_k() == original.time().f_k());
  CHECK(loaded.time().beta() == original.time().beta());
  CHECK(loaded.static_power().p_drop() == original.static_power().p_drop());
  CHECK(loaded.static_power().p_back() == original.static_power().p_back());
  CHECK(loaded.window().f_min() == original.window().f_min());
  CHECK(loaded.window().f_max() == original.window().f_max());

  const Scenario table_scenario(
      VoltageFreqMap::table({{0.2, 0.9}, {0.8, 1.05}, {1.6, 1.3}}),
      CpuPowerParams(0.181, 3.137), ExecTimeParams(1.0, 0.0, 0.0),
      StaticPower(0.0, 0.5), FrequencyWindow(0.2, 1.6));
  const auto tpath = dir.path / "table.scn";
  save_scenario(table_scenario, tpath);
  const Scenario tloaded = load_scenario(tpath);
  REQUIRE(tloaded.vmap().table_rows().size() == 3);
  CHECK(tloaded.vmap().table_rows()[1].volts == 1.05);
}

TEST_CASE("scenario loading reports the offending field", "[io]") {
  TempDir dir;
  const auto expect_error = [&](const std::string& body,
                                const std::string& needle) {
    const auto p = write_file(dir, "bad.scn", body);
    CHECK_THROWS_WITH(load_scenario(p),
                      Catch::Matchers::ContainsSubstring(needle));
  };

  // f_k beyond f_max leaves no exploitable window
  expect_error(R"({"voltage_map":{"affine":{"m1":0.33,"m2":0.808}},
    "cpu":{"xi":0.181,"gamma":3.137},"time":{"cc_b":1.0,"f_k":2.0,"beta":0.0},
    "power":{"p_drop":0.0,"p_back":0.5},"window":{"f_min":0.2,"f_max":1.6}})",
               "exploitable window");
  expect_error(R"({"voltage_map":{"affine":{"m1":0.33,"m2":0.808}},
    "cpu":{"xi":-0.1,"gamma":3.137},"time":{"cc_b":1.0,"f_k":0.0,"beta":0.0},
    "power":{"p_drop":0.0,"p_back":0.5},"window":{"f_min":0.2,"f_max":1.6}})",
               "xi");
  expect_error(R"({"voltage_map":{"affine":{"m1":0.33,"m2":0.808,"m3":1.0}},
    "cpu":{"xi":0.181,"gamma":3.137},"time":{"cc_b":1.0,"f_k":0.0,"beta":0.0},
    "power":{"p_drop":0.0,"p_back":0.5},"window":{"f_min":0.2,"f_max":1.6}})",
               "unknown key 'm3'");
  expect_error(R"({"cpu":{"xi":0.181,"gamma":3.137},
    "time":{"cc_b":1.0,"f_k":0.0,"beta":0.0},
    "power":{"p_drop":0.0,"p_back":0.5},"window":{"f_min":0.2,"f_max":1.6}})",
               "voltage_map");
  expect_error("{not json", "not valid JSON");
  CHECK_THROWS_WITH(load_scenario(dir.path / "absent.scn"),
                    Catch::Matchers::ContainsSubstring("cannot open"));
}

TEST_CASE("trace files parse and validate", "[io]") {
  std::istringstream good("freq_ghz,value,voltage_v\r\n"
                          "0.2,1.5,0.87\n"
                          "0.2,1.52,0.87\n"
                          "1.6,0.4,1.34\n");
  const std::vector<TraceSample> samples = parse_traces(good);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].f_ghz == 0.2);
  CHECK(samples[1].value == 1.52);
  REQUIRE(samples[2].voltage_v.has_value());
  CHECK(*samples[2].voltage_v == 1.34);

  std::istringstream no_header("f,value\n0.2,1.5\n");
  CHECK_THROWS_WITH(parse_traces(no_header),
                    Catch::Matchers::ContainsSubstring("unknown column"));

  std::istringstream missing("value\n1.5\n");
  CHECK_THROWS_WITH(parse_traces(missing),
                    Catch::Matchers::ContainsSubstring("missing column freq_ghz"));

  std::istringstream negative("freq_ghz,value\n"
                              "0.2,1.5\n0.3,1.4\n0.4,1.3\n0.5,-0.25\n");
  CHECK_THROWS_WITH(parse_traces(negative),
                    Catch::Matchers::ContainsSubstring("line 5"));

  std::istringstream garbled("freq_ghz,value\n0.2,abc\n");
  CHECK_THROWS_WITH(parse_traces(garbled),
                    Catch::Matchers::ContainsSubstring("line 2"));
}

TEST_CASE("cli fopt reports the reference optimum", "[io]") {
  TempDir dir;
  const auto scn = write_file(dir, "ref.scn", kReferenceScenario);
  std::string out;
  REQUIRE(run({"fopt", "--scenario", scn.string(), "--format", "csv"}, &out) ==
          0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0][0] == "f_opt_ghz");
  const double f_opt = std::stod(rows[1][0]);
  CHECK_THAT(f_opt, Catch::Matchers::WithinAbs(0.8, 0.05));
  CHECK(rows[1][1] == "interior");
  CHECK(rows[1][2] == "numeric");
}

TEST_CASE("cli energy-curve finds the fitted benchmark argmin", "[io]") {
  TempDir dir;
  const auto scn = write_file(dir, "n12.scn", R"({
    "voltage_map": {"affine": {"m1": 0.330, "m2": 0.808}},
    "cpu": {"xi": 0.137, "gamma": 4.36},
    "time": {"cc_b": 144.359, "f_k": 0.13, "beta": -0.202},
    "power": {"p_drop": 0.0, "p_back": 0.469},
    "window": {"f_min": 0.2, "f_max": 1.6}
  })");
  std::string out;
  REQUIRE(run({"energy-curve", "--scenario", scn.string(), "--grid",
               "0.2:1.6:0.1", "--format", "csv"},
              &out) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 16);  // header + 15 grid points

  double best_f = 0.0, best_e = 1e300;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double f = std::stod(rows[i][0]);
    const double e = std::stod(rows[i][4]);
    if (e < best_e) {
      best_e = e;
      best_f = f;
    }
  }
  // Cross-check against the library-evaluated curve, then the frozen
  // grid-oracle location for these fitted parameters.
  const EnergyCurve curve =
      sample_energy_curve(testutil::n12_scenario(), GridSpec{0.2, 1.6, 0.1});
  double lib_f = 0.0, lib_e = 1e300;
  for (const EnergyCurveRow& row : curve) {
    if (row.e_sys_j < lib_e) {
      lib_e = row.e_sys_j;
      lib_f = row.f_ghz;
    }
  }
  CHECK_THAT(best_f, Catch::Matchers::WithinAbs(lib_f, 1e-9));
  CHECK(best_f >= 1.0);
  CHECK(best_f <= 1.3);
  // interior minimum: lower than both window edges
  CHECK(best_e < std::stod(rows[1][4]));
  CHECK(best_e < std::stod(rows[15][4]));
}

TEST_CASE("cli sweep over p_back is monotone and marks the p_back=0 ratio",
          "[io]") {
  TempDir dir;
  const auto scn = write_file(dir, "ref.scn", kReferenceScenario);
  std::string out;
  REQUIRE(run({"sweep", "--scenario", scn.string(), "--param", "p_back",
               "--range", "0:5:0.05", "--format", "csv"},
              &out) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 102);  // header + 101 points
  REQUIRE(rows[0][0] == "param1");
  CHECK(rows[1][4] == "inf");  // ratio marker at p_back = 0
  double prev = -1.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double f = std::stod(rows[i][2]);
    CHECK(f >= prev - 1e-9);
    prev = f;
    CHECK(rows[i][1].empty());  // no second parameter
  }
}

TEST_CASE("cli csv and json encode identical numbers", "[io]") {
  TempDir dir;
  const auto scn = write_file(dir, "ref.scn", kReferenceScenario);
  std::string csv_text, json_text;
  REQUIRE(run({"energy-curve", "--scenario", scn.string(), "--grid",
               "0.2:1.6:0.2", "--format", "csv"},
              &csv_text) == 0);
  REQUIRE(run({"energy-curve", "--scenario", scn.string(), "--grid",
               "0.2:1.6:0.2", "--format", "json"},
              &json_text) == 0);
  const auto csv_nums = extract_numerals(csv_text);
  const auto json_nums = extract_numerals(json_text);
  REQUIRE(csv_nums.size() == json_nums.size());
  for (std::size_t i = 0; i < csv_nums.size(); ++i)
    CHECK(csv_nums[i] == json_nums[i]);
  // json output parses as json
  CHECK_NOTHROW(nlohmann::json::parse(json_text));
}

TEST_CASE("cli recommend prints regime and savings", "[io]") {
  TempDir dir;
  const auto scn = write_file(dir, "ref.scn", kReferenceScenario);
  std::string out;
  REQUIRE(run({"recommend", "--scenario", scn.string(), "--format", "csv"},
              &out) == 0);
  const auto rows = csv_rows(out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "exploitable");
  CHECK(rows[1][1] == "chase-fopt");
  CHECK(std::stod(rows[1][10]) > 0.0);  // savings_vs_low_pct
  CHECK(std::stod(rows[1][11]) > 0.0);  // savings_vs_high_pct
}

TEST_CASE("cli fit commands recover parameters from files", "[io]") {
  TempDir dir;
  std::ostringstream time_csv;
  time_csv.precision(17);
  time_csv << "freq_ghz,value\n";
  for (double f = 0.2; f < 1.65; f += 0.1)
    time_csv << f << "," << 144.359 * (1.0 / (f - 0.13) - 0.202) << "\n";
  const auto tpath = write_file(dir, "time.csv", time_csv.str());
  std::string out;
  REQUIRE(run({"fit-time", "--input", tpath.string(), "--format", "csv"},
              &out) == 0);
  auto rows = csv_rows(out);
  REQUIRE(rows.size() == 2);
  CHECK_THAT(std::stod(rows[1][0]), Catch::Matchers::WithinRel(144.359, 1e-4));
  CHECK_THAT(std::stod(rows[1][1]), Catch::Matchers::WithinRel(0.13, 1e-3));
  CHECK_THAT(std::stod(rows[1][2]), Catch::Matchers::WithinRel(-0.202, 1e-3));

  std::ostringstream vmap_csv;
  vmap_csv.precision(17);
  vmap_csv << "freq_ghz,value\n";
  for (double f = 0.2; f < 1.65; f += 0.2)
    vmap_csv << f << "," << 0.330 * f + 0.808 << "\n";
  const auto vpath = write_file(dir, "vmap.csv", vmap_csv.str());
  REQUIRE(run({"fit-vmap", "--input", vpath.string(), "--format", "csv"},
              &out) == 0);
  rows = csv_rows(out);
  CHECK_THAT(std::stod(rows[1][0]), Catch::Matchers::WithinRel(0.330, 1e-9));
  CHECK_THAT(std::stod(rows[1][1]), Catch::Matchers::WithinRel(0.808, 1e-9));

  std::ostringstream power_csv;
  power_csv.precision(17);
  power_csv << "freq_ghz,value,voltage_v\n";
  for (double f = 0.2; f < 1.65; f += 0.1) {
    const double v = 0.330 * f + 0.808;
    power_csv << f << "," << 0.469 + (1 + 4.36 * v) * 0.137 * f * v * v << ","
              << v << "\n";
  }
  const auto ppath = write_file(dir, "power.csv", power_csv.str());
  REQUIRE(run({"fit-power", "--input", ppath.string(), "--format", "csv"},
              &out) == 0);
  rows = csv_rows(out);
  CHECK_THAT(std::stod(rows[1][0]), Catch::Matchers::WithinRel(0.137, 1e-6));
  CHECK_THAT(std::stod(rows[1][1]), Catch::Matchers::WithinRel(4.36, 1e-6));
  CHECK_THAT(std::stod(rows[1][2]), Catch::Matchers::WithinRel(0.469, 1e-6));
}

TEST_CASE("cli exit codes separate usage, validation and runtime errors",
          "[io]") {
  TempDir dir;
  std::string out, err;

  CHECK(run({"frobnicate"}, &out, &err) == 2);
  CHECK(err.find("Usage") != std::string::npos);

  const auto scn = write_file(dir, "ref.scn", kReferenceScenario);
  CHECK(run({"fopt", "--scenario", scn.string(), "--bogus-flag"}, &out, &err) ==
        2);
  CHECK(run({"fopt", "--scenario", (dir.path / "absent.scn").string()}, &out,
            &err) == 2);
  CHECK(run({"energy-curve", "--scenario", scn.string(), "--grid", "nope"},
            &out, &err) == 2);
  CHECK(run({"energy-curve", "--scenario", scn.string(), "--grid",
             "1.6:0.2:0.1"},
            &out, &err) == 2);

  // traces without the voltage column are invalid input for fit-power
  const auto tpath = write_file(
      dir, "t.csv", "freq_ghz,value\n0.2,1\n0.4,2\n0.6,3\n0.8,4\n");
  CHECK(run({"fit-power", "--input", tpath.string()}, &out, &err) == 2);

  // grid outside the exploitable window is a domain failure at runtime
  CHECK(run({"energy-curve", "--scenario", scn.string(), "--grid",
             "0.1:1.6:0.1"},
            &out, &err) == 1);

  CHECK(run({"--help"}, &out, &err) == 0);
  CHECK(out.find("energy-curve") != std::string::npos);
}

TEST_CASE("cli include-back flag moves the optimum", "[io]") {
  TempDir dir;
  const auto scn = write_file(dir, "heavy.scn", R"({
    "voltage_map": {"affine": {"m1": 0.330, "m2": 0.808}},
    "cpu": {"xi": 0.181, "gamma": 3.137},
    "time": {"cc_b": 1.0, "f_k": 0.0, "beta": 0.0},
    "power": {"p_drop": 0.0, "p_back": 2.0},
    "window": {"f_min": 0.2, "f_max": 1.6}
  })");
  std::string with_back, without_back;
  REQUIRE(run({"fopt", "--scenario", scn.string(), "--format", "csv"},
              &with_back) == 0);
  REQUIRE(run({"fopt", "--scenario", scn.string(), "--format", "csv",
               "--include-back", "false"},
              &without_back) == 0);
  const double f_with = std::stod(csv_rows(with_back)[1][0]);
  const double f_without = std::stod(csv_rows(without_back)[1][0]);
  CHECK(f_without < f_with);
}
