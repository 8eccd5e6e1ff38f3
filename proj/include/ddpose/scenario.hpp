#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddpose/atmosphere.hpp"
#include "ddpose/measurements.hpp"
#include "ddpose/orbits.hpp"
#include "ddpose/solver.hpp"

namespace ddpose {

struct TrajectorySample {
  UtcTime epoch;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double path_length_m = 0.0;
};

/// Constant-speed drive through geodetic waypoints. A single waypoint with `stationary`
/// set describes a receiver at rest.
struct TrajectorySpec {
  std::vector<GeodeticCoord> waypoints;
  double speed_mps = 10.0;
  bool stationary = false;
};

/// Sum of ECEF chord lengths between consecutive waypoints.
double path_length(const TrajectorySpec& spec);

/// Samples at start + k / epoch_rate until `duration` elapses or the path ends, whichever is
/// first. Positions interpolate linearly in latitude, longitude and height along each segment;
/// velocities are the segment chord direction times the speed. Throws ConfigError for an
/// empty or zero-length path.
Trajectory build_trajectory(const TrajectorySpec& spec, UtcTime start, double epoch_rate, double duration);

struct ClockSettings {
  ClockRanges base;
  ClockRanges ut;
  ClockRanges satellite;
};

struct ScenarioConfig {
  std::string name;
  std::filesystem::path tle_path;
  UtcTime start;
  GeodeticCoord base;
  TrajectorySpec trajectory;
  double epoch_rate = 1.0;       // Hz
  double duration = 0.0;         // s
  double elevation_mask = 15.0;  // deg
  double max_staleness_days = 7.0;
  EphemerisErrorSpec ephemeris_error;
  ClockSettings clocks;
  std::optional<AtmosphereModel> atmosphere_truth;
  std::optional<AtmosphereModel> atmosphere_solver;
  NoiseModel noise;
  SnrModel snr;
  double carrier_frequency_hz = kDefaultCarrierFrequencyHz;
  SolverConfig solver;
  std::vector<Method> methods = all_methods();
  std::uint64_t seed = 1;

  void validate() const;
};

/// Reads a YAML scenario. Relative `tle` paths resolve against the scenario's directory.
/// Unknown keys raise ParseError with the key's location; out-of-domain values raise
/// ConfigError naming the field.
ScenarioConfig load_scenario(const std::filesystem::path& path);
ScenarioConfig parse_scenario(const std::string& text, const std::string& source_name,
                              const std::filesystem::path& base_dir);

struct RmseSummary {
  Method method = Method::vanilla_dd;
  double north = 0.0;
  double east = 0.0;
  double up = 0.0;
  double three_d = 0.0;
  std::size_t epoch_count = 0;   // epochs contributing
  std::size_t total_epochs = 0;  // epochs attempted
  double convergence_rate = 0.0;
};

/// Component-wise RMS and 3-D RMS from squared norms. Throws std::invalid_argument when empty.
RmseSummary rmse_neu(std::span<const EnuVector> errors);

struct MethodEpoch {
  EpochSolution solution;
  std::optional<EnuVector> error;  // north/east/up error at the true position when solved
};

struct EpochRecord {
  std::size_t index = 0;
  TrajectorySample truth;
  std::size_t n_common = 0;
  std::vector<MethodEpoch> methods;  // aligned with ScenarioConfig::methods
};

struct ScenarioResult {
  ScenarioConfig config;
  Vec3 base_ecef = Vec3::Zero();
  std::vector<MeasurementSet> measurements;
  std::vector<EpochRecord> epochs;
  std::vector<RmseSummary> summary;  // aligned with ScenarioConfig::methods
  std::vector<std::string> warnings;
};

/// Per-epoch estimated states for every satellite: propagated truth plus the scenario's
/// ephemeris offsets (fixed per satellite for the whole run).
std::vector<OrbitState> estimated_states(std::span<const OrbitState> truth, const EphemerisErrorSpec& spec,
                                         std::uint64_t seed);

/// Runs synthesis and every configured method at each trajectory epoch.
ScenarioResult run_scenario(const ScenarioConfig& cfg);
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::vector<TleRecord>& constellation);

/// Solves pre-recorded measurements (no truth needed). Satellite states come from the
/// constellation, shifted by `ephemeris` offsets drawn from `seed` (zero spec: as propagated).
std::vector<SolutionReport> solve_measurements(std::span<const MeasurementSet> epochs,
                                               const std::vector<TleRecord>& constellation, const Vec3& base_pos,
                                               std::span<const Method> methods, const SolverConfig& cfg,
                                               const EphemerisErrorSpec& ephemeris = {}, std::uint64_t seed = 0,
                                               double max_staleness_days = 7.0);

}  // namespace ddpose
