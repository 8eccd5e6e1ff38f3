#include "ddpose/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <ostream>
#include <sstream>

#include "ddpose/errors.hpp"
#include "ddpose/exchange.hpp"
#include "ddpose/io.hpp"
#include "ddpose/reports.hpp"
#include "ddpose/scenario.hpp"
#include "ddpose/tle.hpp"

namespace ddpose::cli {
namespace {

CommandOutcome failure(int code, std::string message) {
  CommandOutcome o;
  o.exit_code = code;
  o.error_message = std::move(message);
  return o;
}

template <typename Body>
CommandOutcome guarded(Body&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    return failure(kExitConfig, e.what());
  } catch (const ConfigError& e) {
    return failure(kExitConfig, std::string("configuration error: ") + e.what());
  } catch (const InsufficientSatellites& e) {
    return failure(kExitInsufficient, e.what());
  } catch (const std::exception& e) {
    return failure(kExitRuntime, e.what());
  }
}

std::optional<std::filesystem::path> tle_from_env() {
  if (const char* v = std::getenv(kTleEnvVar); v != nullptr && *v != '\0') return std::filesystem::path(v);
  return std::nullopt;
}

std::optional<CommandOutcome> require_file(const std::filesystem::path& path, const char* what) {
  if (std::filesystem::is_regular_file(path)) return std::nullopt;
  return failure(kExitConfig, std::string(what) + " '" + path.string() + "' not found");
}

ScenarioConfig load_with_overrides(const std::filesystem::path& scenario_path, const ScenarioOverrides& o) {
  ScenarioConfig cfg = load_scenario(scenario_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.tle) {
    cfg.tle_path = *o.tle;
  } else if (const auto env = tle_from_env(); env && !std::filesystem::exists(cfg.tle_path)) {
    cfg.tle_path = *env;
  }
  if (o.mask_deg) cfg.elevation_mask = *o.mask_deg;
  if (!o.methods.empty()) cfg.methods = o.methods;
  cfg.validate();
  return cfg;
}

void write_artifact(CommandOutcome& outcome, const std::filesystem::path& path, const std::string& content) {
  write_file_atomic(path, content);
  outcome.artifacts_written.push_back(path);
}

std::string warnings_text(const std::vector<std::string>& warnings) {
  std::string out;
  for (const auto& w : warnings) out += "warning: " + w + "\n";
  return out;
}

}  // namespace

CommandOutcome cmd_simulate(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
                            const ScenarioOverrides& overrides) {
  if (auto missing = require_file(scenario_path, "scenario file")) return *missing;
  return guarded([&] {
    const ScenarioConfig cfg = load_with_overrides(scenario_path, overrides);
    const ScenarioResult result = run_scenario(cfg);

    ExchangeFile exchange;
    exchange.base_position = result.base_ecef;
    exchange.carrier_frequency_hz = cfg.carrier_frequency_hz;
    exchange.epochs = result.measurements;
    exchange.truth = truth_samples(result);

    const std::vector<EstimateRow> rows = estimate_rows(result);
    const std::vector<RmseSummary> summary = summarize(rows, cfg.methods);

    CommandOutcome o;
    write_artifact(o, out_dir / kMeasurementsFile, format_exchange(exchange));
    write_artifact(o, out_dir / kEstimatesFile, format_estimates_csv(rows));
    write_artifact(o, out_dir / kSummaryFile, format_rmse_csv(summary));
    write_artifact(o, out_dir / kGeojsonFile, format_geojson(rows, exchange.truth, summary));
    o.summary_lines = format_rmse_table(summary, "scenario " + cfg.name + " (" + std::to_string(result.epochs.size()) +
                                                     " epochs, seed " + std::to_string(cfg.seed) + ")");
    o.error_message = warnings_text(result.warnings);
    return o;
  });
}

CommandOutcome cmd_solve(const std::filesystem::path& measurements_path, const std::filesystem::path& out_dir,
                         const SolveOptions& options) {
  if (auto missing = require_file(measurements_path, "measurement file")) return *missing;
  if (options.scenario) {
    if (auto missing = require_file(*options.scenario, "scenario file")) return *missing;
  }
  return guarded([&] {
    const ExchangeFile exchange = read_exchange_file(measurements_path);

    SolverConfig solver;
    EphemerisErrorSpec ephemeris;
    std::uint64_t seed = 0;
    double staleness = 7.0;
    std::optional<std::filesystem::path> tle = options.tle;
    if (options.scenario) {
      const ScenarioConfig cfg = load_scenario(*options.scenario);
      solver = cfg.solver;
      solver.atmosphere_correction = cfg.atmosphere_solver;
      ephemeris = cfg.ephemeris_error;
      seed = cfg.seed;
      staleness = cfg.max_staleness_days;
      if (!tle && std::filesystem::exists(cfg.tle_path)) tle = cfg.tle_path;
    }
    if (options.seed) seed = *options.seed;
    if (!tle) tle = tle_from_env();
    if (!tle) {
      throw ConfigError("tle", std::string("no TLE source: pass --tle, --scenario or set ") + kTleEnvVar);
    }
    const std::vector<TleRecord> constellation = load_tle_file(*tle);
    const std::vector<Method> methods = options.methods.empty() ? all_methods() : options.methods;

    const std::vector<SolutionReport> reports =
        solve_measurements(exchange.epochs, constellation, exchange.base_position, methods, solver, ephemeris, seed,
                           staleness);
    const std::vector<EstimateRow> rows = estimate_rows(reports, exchange.truth);

    CommandOutcome o;
    write_artifact(o, out_dir / kEstimatesFile, format_estimates_csv(rows));
    if (!exchange.truth.empty()) {
      const std::vector<RmseSummary> summary = summarize(rows, methods);
      write_artifact(o, out_dir / kSummaryFile, format_rmse_csv(summary));
      o.summary_lines = format_rmse_table(summary, "solved " + std::to_string(exchange.epochs.size()) + " epochs");
    } else {
      o.summary_lines = "solved " + std::to_string(exchange.epochs.size()) + " epochs (no truth block)\n";
    }

    // Epochs that cannot support a method are listed and change the exit code.
    std::string short_epochs;
    std::size_t short_count = 0;
    for (const auto& set : exchange.epochs) {
      const std::size_t n = set.common_satellite_ids.size();
      for (const Method m : methods) {
        const std::size_t required = m == Method::differential ? 8 : 7;
        if (n < required) {
          short_epochs += "  " + set.epoch.to_iso8601() + " " + std::string(to_string(m)) + ": " + std::to_string(n) +
                          " common satellites, " + std::to_string(required) + " required\n";
          ++short_count;
        }
      }
    }
    if (short_count > 0) {
      o.exit_code = kExitInsufficient;
      o.error_message = "insufficient satellites at " + std::to_string(short_count) + " epoch/method pairs:\n" +
                        short_epochs;
    }
    return o;
  });
}

CommandOutcome cmd_compare(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
                           const ScenarioOverrides& overrides) {
  if (!overrides.methods.empty() && overrides.methods.size() < 2) {
    return failure(kExitConfig, "compare needs at least two methods");
  }
  if (auto missing = require_file(scenario_path, "scenario file")) return *missing;
  return guarded([&] {
    ScenarioOverrides o2 = overrides;
    if (o2.methods.empty()) o2.methods = all_methods();
    const ScenarioConfig cfg = load_with_overrides(scenario_path, o2);
    const ScenarioResult result = run_scenario(cfg);
    const std::vector<EstimateRow> rows = estimate_rows(result);
    const std::vector<RmseSummary> summary = summarize(rows, cfg.methods);

    CommandOutcome o;
    o.summary_lines = format_rmse_table(summary, "RMSE in NEU frame, scenario " + cfg.name);
    write_artifact(o, out_dir / kComparisonCsv, format_rmse_csv(summary));
    write_artifact(o, out_dir / kComparisonTxt, o.summary_lines);
    o.error_message = warnings_text(result.warnings);
    return o;
  });
}

CommandOutcome cmd_report(const std::filesystem::path& run_dir, ReportFormat format,
                          const std::optional<std::filesystem::path>& out_file) {
  const std::filesystem::path estimates = run_dir / kEstimatesFile;
  if (auto missing = require_file(estimates, "estimates file")) return *missing;
  return guarded([&] {
    const std::vector<EstimateRow> rows = parse_estimates_csv(read_text_file(estimates), estimates.string());
    std::vector<TruthSample> truth;
    if (const auto m = run_dir / kMeasurementsFile; std::filesystem::is_regular_file(m)) {
      truth = read_exchange_file(m).truth;
    }
    const std::vector<RmseSummary> summary = summarize(rows);

    CommandOutcome o;
    std::string content;
    switch (format) {
      case ReportFormat::table:
        content = format_rmse_table(summary);
        break;
      case ReportFormat::csv:
        content = format_rmse_csv(summary);
        break;
      case ReportFormat::geojson:
        content = format_geojson(rows, truth, summary);
        break;
    }
    if (out_file) {
      write_artifact(o, *out_file, content);
      o.summary_lines = format_rmse_table(summary);
    } else {
      o.summary_lines = content;
    }
    return o;
  });
}

namespace {

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const auto& n : names) {
    const Method m = method_from_string(n);
    if (std::find(out.begin(), out.end(), m) != out.end()) {
      throw ConfigError("methods", "duplicate method '" + n + "'");
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"LEO double-difference Doppler positioning lab"};
  app.require_subcommand(1);

  std::string scenario, out_dir = "out", tle, measurements, run_dir, format = "table", report_out;
  std::vector<std::string> methods;
  std::uint64_t seed = 0;
  double mask = 15.0;

  const auto add_scenario_flags = [&](CLI::App* sub, bool with_mask) {
    sub->add_option("--seed", seed, "Scenario seed override");
    sub->add_option("--tle", tle, std::string("TLE file or directory (default: scenario, then $") + kTleEnvVar + ")");
    sub->add_option("--methods", methods, "Comma-separated methods: differential,vanilla_dd,3dpose_ls,3dpose_wls")
        ->delimiter(',');
    if (with_mask) sub->add_option("--mask-deg", mask, "Elevation mask override in degrees");
  };

  CLI::App* simulate = app.add_subcommand("simulate", "Synthesize measurements for a scenario and solve them");
  simulate->add_option("--scenario", scenario, "Scenario YAML file")->required();
  simulate->add_option("--out", out_dir, "Output directory");
  add_scenario_flags(simulate, true);

  CLI::App* solve = app.add_subcommand("solve", "Solve a measurement exchange file");
  solve->add_option("measurements", measurements, "Measurement exchange file")->required();
  solve->add_option("--scenario", scenario, "Scenario whose solver settings and ephemeris offsets apply");
  solve->add_option("--out", out_dir, "Output directory");
  add_scenario_flags(solve, false);

  CLI::App* compare = app.add_subcommand("compare", "Tabulate NEU RMSE for several methods on one scenario");
  compare->add_option("--scenario", scenario, "Scenario YAML file")->required();
  compare->add_option("--out", out_dir, "Output directory");
  add_scenario_flags(compare, true);

  CLI::App* report = app.add_subcommand("report", "Render a summary from a simulate or solve output directory");
  report->add_option("dir", run_dir, "Output directory of an earlier run")->required();
  report->add_option("--format", format, "csv, geojson or table")
      ->check(CLI::IsMember({"csv", "geojson", "table"}));
  report->add_option("--out", report_out, "Write the rendering to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  CommandOutcome outcome;
  try {
    ScenarioOverrides ov;
    ov.methods = parse_methods(methods);
    if (!tle.empty()) ov.tle = tle;
    const CLI::App* active = app.get_subcommands().front();
    if (active != report && active->count("--seed") > 0) ov.seed = seed;
    if (active == simulate || active == compare) {
      if (active->count("--mask-deg") > 0) ov.mask_deg = mask;
    }

    if (active == simulate) {
      outcome = cmd_simulate(scenario, out_dir, ov);
    } else if (active == solve) {
      SolveOptions so;
      so.tle = ov.tle;
      so.seed = ov.seed;
      so.methods = ov.methods;
      if (!scenario.empty()) so.scenario = scenario;
      outcome = cmd_solve(measurements, out_dir, so);
    } else if (active == compare) {
      outcome = cmd_compare(scenario, out_dir, ov);
    } else {
      const ReportFormat f = format == "csv" ? ReportFormat::csv
                             : format == "geojson" ? ReportFormat::geojson
                                                   : ReportFormat::table;
      outcome = cmd_report(run_dir, f, report_out.empty() ? std::nullopt
                                                          : std::optional<std::filesystem::path>(report_out));
    }
  } catch (const std::invalid_argument& e) {
    outcome = failure(kExitConfig, e.what());
  } catch (const ConfigError& e) {
    outcome = failure(kExitConfig, e.what());
  }

  out << outcome.summary_lines;
  if (!outcome.error_message.empty()) {
    err << (outcome.exit_code == kExitOk ? "" : "error: ") << outcome.error_message;
    if (outcome.error_message.back() != '\n') err << "\n";
  }
  return outcome.exit_code;
}

}  // namespace ddpose::cli
