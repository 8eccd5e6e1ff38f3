#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddpose/solver.hpp"

namespace ddpose::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitInsufficient = 4;

/// Environment variable naming the default TLE file or directory.
inline constexpr const char* kTleEnvVar = "DDPOSE_TLE_DIR";

/// Artifact file names inside an output directory.
inline constexpr const char* kMeasurementsFile = "measurements.csv";
inline constexpr const char* kEstimatesFile = "estimates.csv";
inline constexpr const char* kSummaryFile = "summary.csv";
inline constexpr const char* kGeojsonFile = "trajectories.geojson";
inline constexpr const char* kComparisonCsv = "comparison.csv";
inline constexpr const char* kComparisonTxt = "comparison.txt";

struct CommandOutcome {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> artifacts_written;
  std::string summary_lines;  // what the command prints on stdout
  std::string error_message;  // what the command prints on stderr
};

/// Overrides shared by the scenario-driven commands.
struct ScenarioOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> tle;
  std::optional<double> mask_deg;
  std::vector<Method> methods;  // empty: keep the scenario's list
};

CommandOutcome cmd_simulate(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
                            const ScenarioOverrides& overrides = {});

struct SolveOptions {
  std::optional<std::filesystem::path> tle;
  std::optional<std::filesystem::path> scenario;  // solver settings and ephemeris offsets to reproduce
  std::optional<std::uint64_t> seed;
  std::vector<Method> methods;  // empty: all methods
};

CommandOutcome cmd_solve(const std::filesystem::path& measurements_path, const std::filesystem::path& out_dir,
                         const SolveOptions& options);

CommandOutcome cmd_compare(const std::filesystem::path& scenario_path, const std::filesystem::path& out_dir,
                           const ScenarioOverrides& overrides);

enum class ReportFormat { csv, geojson, table };

/// Re-renders the artifacts of a simulate or solve output directory.
CommandOutcome cmd_report(const std::filesystem::path& run_dir, ReportFormat format,
                          const std::optional<std::filesystem::path>& out_file);

/// Parses arguments, dispatches, prints the outcome and returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ddpose::cli
