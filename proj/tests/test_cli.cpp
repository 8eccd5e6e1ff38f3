#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ddpose/cli.hpp"
#include "ddpose/exchange.hpp"
#include "ddpose/io.hpp"
#include "ddpose/reports.hpp"
#include "support.hpp"

using namespace ddpose;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ddpose_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Shortened copy of a shipped scenario with an absolute TLE path.
fs::path short_scenario(const fs::path& dir, const std::string& which, int duration) {
  std::string text = read_text_file(test::data_dir() / "scenarios" / which);
  const auto tle = text.find("tle: ../starlink_118.tle");
  text.replace(tle, 24, "tle: " + (test::data_dir() / "starlink_118.tle").string());
  const auto dur = text.find("duration: 600");
  text.replace(dur, 13, "duration: " + std::to_string(duration));
  const fs::path path = dir / which;
  std::ofstream(path) << text;
  return path;
}

int run_cli(std::initializer_list<std::string> args, std::string* out_text = nullptr) {
  std::vector<const char*> argv{"ddpose"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

}  // namespace

TEST_CASE("simulate writes the four artifacts") {
  const fs::path dir = scratch("simulate");
  const fs::path scenario = short_scenario(dir, "scenario_1.yaml", 12);
  const cli::CommandOutcome o = cli::cmd_simulate(scenario, dir / "run");
  CHECK(o.exit_code == cli::kExitOk);
  for (const char* f : {cli::kMeasurementsFile, cli::kEstimatesFile, cli::kSummaryFile, cli::kGeojsonFile}) {
    CHECK(fs::exists(dir / "run" / f));
  }
  CHECK(o.artifacts_written.size() == 4);
  CHECK(o.summary_lines.find("3dpose_wls") != std::string::npos);

  const std::string summary = read_text_file(dir / "run" / cli::kSummaryFile);
  CHECK(summary.rfind("method,rmse_n,rmse_e,rmse_u,rmse_3d", 0) == 0);
  const std::string geojson = read_text_file(dir / "run" / cli::kGeojsonFile);
  CHECK(geojson.find("FeatureCollection") != std::string::npos);
}

TEST_CASE("missing scenario is a usage error naming the path") {
  const fs::path dir = scratch("missing");
  const cli::CommandOutcome o = cli::cmd_simulate(dir / "nope.yaml", dir / "run");
  CHECK(o.exit_code == cli::kExitConfig);
  CHECK(o.error_message.find("nope.yaml") != std::string::npos);

  std::string text;
  CHECK(run_cli({"simulate", "--scenario", (dir / "nope.yaml").string(), "--out", (dir / "x").string()}, &text) ==
        cli::kExitConfig);
  CHECK(text.find("nope.yaml") != std::string::npos);
  CHECK(run_cli({"teleport"}) == cli::kExitConfig);
}

TEST_CASE("fixed seed gives identical artifacts") {
  const fs::path dir = scratch("determinism");
  const fs::path scenario = short_scenario(dir, "scenario_1.yaml", 10);
  const std::string s = scenario.string();
  REQUIRE(run_cli({"simulate", "--scenario", s, "--out", (dir / "a").string(), "--seed", "7"}) == 0);
  REQUIRE(run_cli({"simulate", "--scenario", s, "--out", (dir / "b").string(), "--seed", "7"}) == 0);
  REQUIRE(run_cli({"simulate", "--scenario", s, "--out", (dir / "c").string(), "--seed", "8"}) == 0);
  for (const char* f : {cli::kMeasurementsFile, cli::kEstimatesFile, cli::kSummaryFile, cli::kGeojsonFile}) {
    CHECK(read_text_file(dir / "a" / f) == read_text_file(dir / "b" / f));
  }
  CHECK(read_text_file(dir / "a" / cli::kMeasurementsFile) != read_text_file(dir / "c" / cli::kMeasurementsFile));
}

TEST_CASE("solve reproduces the simulate estimates") {
  const fs::path dir = scratch("solve");
  const fs::path scenario = short_scenario(dir, "scenario_3.yaml", 10);
  REQUIRE(cli::cmd_simulate(scenario, dir / "sim").exit_code == 0);

  cli::SolveOptions opts;
  opts.scenario = scenario;
  const cli::CommandOutcome o = cli::cmd_solve(dir / "sim" / cli::kMeasurementsFile, dir / "solved", opts);
  REQUIRE(o.exit_code == cli::kExitOk);
  CHECK(read_text_file(dir / "solved" / cli::kEstimatesFile) == read_text_file(dir / "sim" / cli::kEstimatesFile));

  // Paired methods on the long-baseline file, scored against the embedded truth.
  const auto rows = parse_estimates_csv(read_text_file(dir / "sim" / cli::kEstimatesFile), "estimates");
  double wls = 0.0, vanilla = 0.0;
  int n_wls = 0, n_vanilla = 0;
  for (const auto& r : rows) {
    if (!r.error) continue;
    if (r.method == Method::dd3pose_wls) wls += r.error->norm(), ++n_wls;
    if (r.method == Method::vanilla_dd) vanilla += r.error->norm(), ++n_vanilla;
  }
  REQUIRE(n_wls > 0);
  REQUIRE(n_vanilla > 0);
  CHECK(wls / n_wls < vanilla / n_vanilla);

  opts.scenario.reset();
  opts.tle = test::data_dir() / "starlink_118.tle";
  CHECK(cli::cmd_solve(dir / "sim" / cli::kMeasurementsFile, dir / "solved_tle", opts).exit_code == 0);

  const std::string full = read_text_file(dir / "sim" / cli::kMeasurementsFile);
  write_file_atomic(dir / "cut.csv", full.substr(0, full.size() / 2));
  const cli::CommandOutcome cut = cli::cmd_solve(dir / "cut.csv", dir / "solved_cut", opts);
  CHECK(cut.exit_code == cli::kExitConfig);
  CHECK(cut.error_message.find("cut.csv:") != std::string::npos);
}

TEST_CASE("compare and report") {
  const fs::path dir = scratch("compare");
  const fs::path scenario = short_scenario(dir, "scenario_1.yaml", 10);

  cli::ScenarioOverrides one;
  one.methods = {Method::dd3pose_wls};
  CHECK(cli::cmd_compare(scenario, dir / "one", one).exit_code == cli::kExitConfig);

  const cli::CommandOutcome all = cli::cmd_compare(scenario, dir / "all", {});
  REQUIRE(all.exit_code == cli::kExitOk);
  const std::string csv = read_text_file(dir / "all" / cli::kComparisonCsv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  for (const Method m : all_methods()) CHECK(csv.find(std::string(to_string(m)) + ",") != std::string::npos);

  REQUIRE(cli::cmd_simulate(scenario, dir / "sim").exit_code == 0);
  const cli::CommandOutcome table = cli::cmd_report(dir / "sim", cli::ReportFormat::table, std::nullopt);
  CHECK(table.exit_code == 0);
  CHECK(table.summary_lines.find("differential") != std::string::npos);
  const cli::CommandOutcome geo = cli::cmd_report(dir / "sim", cli::ReportFormat::geojson, dir / "map.geojson");
  CHECK(geo.exit_code == 0);
  CHECK(read_text_file(dir / "map.geojson") == read_text_file(dir / "sim" / cli::kGeojsonFile));
  CHECK(cli::cmd_report(dir / "absent", cli::ReportFormat::csv, std::nullopt).exit_code == cli::kExitConfig);

  std::string text;
  CHECK(run_cli({"report", (dir / "sim").string(), "--format", "csv"}, &text) == cli::kExitOk);
  CHECK(text.rfind("method,rmse_n", 0) == 0);
  CHECK(run_cli({"report", (dir / "absent").string()}) == cli::kExitConfig);
}
