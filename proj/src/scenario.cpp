#include "ddpose/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>
#include <sstream>

#include "ddpose/errors.hpp"
#include "ddpose/io.hpp"
#include "ddpose/random.hpp"

namespace ddpose {

double path_length(const TrajectorySpec& spec) {
  double total = 0.0;
  for (std::size_t i = 1; i < spec.waypoints.size(); ++i) {
    total += (geodetic_to_ecef(spec.waypoints[i]) - geodetic_to_ecef(spec.waypoints[i - 1])).norm();
  }
  return total;
}

Trajectory build_trajectory(const TrajectorySpec& spec, UtcTime start, double epoch_rate, double duration) {
  if (!(epoch_rate > 0.0)) throw ConfigError("epoch_rate", "must be positive");
  if (!(duration > 0.0)) throw ConfigError("duration", "must be positive");
  if (spec.waypoints.empty()) throw ConfigError("trajectory.waypoints", "at least one waypoint required");

  Trajectory traj;
  const auto sample_count = [&](double span_s) {
    return static_cast<std::size_t>(std::floor(span_s * epoch_rate + 1e-9)) + 1;
  };
  const auto epoch_at = [&](std::size_t k) { return start.plus_seconds(static_cast<double>(k) / epoch_rate); };

  if (spec.stationary) {
    const Vec3 p = geodetic_to_ecef(spec.waypoints.front());
    const std::size_t n = sample_count(duration);
    for (std::size_t k = 0; k < n; ++k) traj.samples.push_back({epoch_at(k), p, Vec3::Zero()});
    return traj;
  }
  if (!(spec.speed_mps > 0.0)) throw ConfigError("trajectory.speed", "must be positive for a moving receiver");
  if (spec.waypoints.size() < 2) throw ConfigError("trajectory.waypoints", "a moving receiver needs two waypoints");

  struct Segment {
    GeodeticCoord a, b;
    Vec3 direction;
    double start_s, length;
  };
  std::vector<Segment> segments;
  double cumulative = 0.0;
  for (std::size_t i = 1; i < spec.waypoints.size(); ++i) {
    const Vec3 pa = geodetic_to_ecef(spec.waypoints[i - 1]);
    const Vec3 pb = geodetic_to_ecef(spec.waypoints[i]);
    const double len = (pb - pa).norm();
    if (len <= 0.0) continue;
    segments.push_back({spec.waypoints[i - 1], spec.waypoints[i], (pb - pa) / len, cumulative, len});
    cumulative += len;
  }
  if (segments.empty()) throw ConfigError("trajectory.waypoints", "zero-length path");
  traj.path_length_m = cumulative;

  const double span = std::min(duration, cumulative / spec.speed_mps);
  const std::size_t n = sample_count(span);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::min(spec.speed_mps * static_cast<double>(k) / epoch_rate, cumulative);
    while (seg + 1 < segments.size() && s > segments[seg].start_s + segments[seg].length) ++seg;
    const Segment& g = segments[seg];
    const double f = std::clamp((s - g.start_s) / g.length, 0.0, 1.0);
    const GeodeticCoord p{g.a.latitude_deg + f * (g.b.latitude_deg - g.a.latitude_deg),
                          g.a.longitude_deg + f * (g.b.longitude_deg - g.a.longitude_deg),
                          g.a.height_m + f * (g.b.height_m - g.a.height_m)};
    traj.samples.push_back({epoch_at(k), geodetic_to_ecef(p), spec.speed_mps * g.direction});
  }
  return traj;
}

void ScenarioConfig::validate() const {
  if (!(duration > 0.0)) throw ConfigError("duration", "must be positive");
  if (!(epoch_rate > 0.0)) throw ConfigError("epoch_rate", "must be positive");
  if (!(elevation_mask >= 0.0 && elevation_mask < 90.0)) throw ConfigError("elevation_mask", "must lie in [0, 90)");
  if (!(max_staleness_days > 0.0)) throw ConfigError("max_staleness_days", "must be positive");
  if (!(base.latitude_deg >= -90.0 && base.latitude_deg <= 90.0)) throw ConfigError("base.latitude", "out of range");
  if (!(noise.std_hz >= 0.0)) throw ConfigError("noise.std_hz", "must be non-negative");
  if (!(snr.jitter_db >= 0.0 && snr.jitter_db <= 1.0)) throw ConfigError("snr.jitter_db", "must lie in [0, 1]");
  if (!(snr.high_elevation_deg > snr.low_elevation_deg)) {
    throw ConfigError("snr.high_elevation_deg", "must exceed snr.low_elevation_deg");
  }
  if (!(carrier_frequency_hz > 0.0)) throw ConfigError("carrier_frequency_hz", "must be positive");
  if (methods.empty()) throw ConfigError("methods", "at least one method required");
  if (!trajectory.stationary && !(trajectory.speed_mps > 0.0)) throw ConfigError("trajectory.speed", "must be positive");
  ephemeris_error.validate();
  solver.validate();
}

namespace {

class YamlReader {
 public:
  explicit YamlReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& message) const {
    const YAML::Mark m = node.Mark();
    if (m.is_null()) throw ParseError(source_, 0, 0, message);
    throw ParseError(source_, static_cast<std::size_t>(m.line) + 1, static_cast<std::size_t>(m.column) + 1, message);
  }

  void expect_map(const YAML::Node& node, const std::string& path) const {
    if (!node.IsMap()) fail(node, "'" + path + "' must be a mapping");
  }

  void check_keys(const YAML::Node& node, const std::string& path, std::initializer_list<const char*> allowed) const {
    expect_map(node, path);
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
      if (!known) fail(kv.first, "unknown key '" + (path.empty() ? key : path + "." + key) + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, "'" + path + "' must be a number");
    try {
      return node.as<double>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + path + "' must be a number, got '" + node.Scalar() + "'");
    }
  }

  long long integer(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, "'" + path + "' must be an integer");
    try {
      return node.as<long long>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + path + "' must be an integer, got '" + node.Scalar() + "'");
    }
  }

  bool boolean(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, "'" + path + "' must be true or false");
    try {
      return node.as<bool>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + path + "' must be true or false, got '" + node.Scalar() + "'");
    }
  }

  std::string text(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, "'" + path + "' must be a string");
    return node.Scalar();
  }

  void read(const YAML::Node& parent, const char* key, const std::string& prefix, double& out) const {
    if (const YAML::Node n = parent[key]) out = number(n, join(prefix, key));
  }
  void read(const YAML::Node& parent, const char* key, const std::string& prefix, bool& out) const {
    if (const YAML::Node n = parent[key]) out = boolean(n, join(prefix, key));
  }
  void read(const YAML::Node& parent, const char* key, const std::string& prefix, int& out) const {
    if (const YAML::Node n = parent[key]) out = static_cast<int>(integer(n, join(prefix, key)));
  }

  /// Scalar (fixed value) or two-element [min, max] sequence.
  MagnitudeRange range(const YAML::Node& node, const std::string& path) const {
    if (node.IsScalar()) return MagnitudeRange::fixed(number(node, path));
    if (node.IsSequence() && node.size() == 2) return {number(node[0], path + "[0]"), number(node[1], path + "[1]")};
    fail(node, "'" + path + "' must be a number or a [min, max] pair");
  }

  GeodeticCoord geodetic(const YAML::Node& node, const std::string& path) const {
    GeodeticCoord g;
    if (node.IsSequence()) {
      if (node.size() != 2 && node.size() != 3) fail(node, "'" + path + "' must be [latitude, longitude, height]");
      g.latitude_deg = number(node[0], path + "[0]");
      g.longitude_deg = number(node[1], path + "[1]");
      if (node.size() == 3) g.height_m = number(node[2], path + "[2]");
    } else {
      check_keys(node, path, {"latitude", "longitude", "height"});
      if (!node["latitude"] || !node["longitude"]) fail(node, "'" + path + "' needs latitude and longitude");
      g.latitude_deg = number(node["latitude"], path + ".latitude");
      g.longitude_deg = number(node["longitude"], path + ".longitude");
      read(node, "height", path, g.height_m);
    }
    if (!(g.latitude_deg >= -90.0 && g.latitude_deg <= 90.0)) {
      throw ConfigError(path + ".latitude", "must lie in [-90, 90] degrees");
    }
    return g;
  }

  static std::string join(const std::string& prefix, const char* key) {
    return prefix.empty() ? std::string(key) : prefix + "." + key;
  }

 private:
  std::string source_;
};

ClockRanges read_clock(const YamlReader& r, const YAML::Node& node, const std::string& path, ClockRanges c) {
  r.check_keys(node, path, {"drift_max", "frequency_drift_max", "drift_noise_std"});
  r.read(node, "drift_max", path, c.drift_max);
  r.read(node, "frequency_drift_max", path, c.frequency_drift_max);
  r.read(node, "drift_noise_std", path, c.drift_noise_std);
  if (!(c.drift_max >= 0.0)) throw ConfigError(path + ".drift_max", "must be non-negative");
  if (!(c.frequency_drift_max >= 0.0)) throw ConfigError(path + ".frequency_drift_max", "must be non-negative");
  if (!(c.drift_noise_std >= 0.0)) throw ConfigError(path + ".drift_noise_std", "must be non-negative");
  return c;
}

void read_atmosphere_fields(const YamlReader& r, const YAML::Node& node, const std::string& path, AtmosphereModel& m) {
  r.read(node, "troposphere", path, m.troposphere);
  r.read(node, "ionosphere", path, m.ionosphere);
  r.read(node, "pressure_hpa", path, m.pressure_hpa);
  r.read(node, "temperature_k", path, m.temperature_k);
  r.read(node, "water_vapor_hpa", path, m.water_vapor_hpa);
  if (!(m.pressure_hpa > 0.0)) throw ConfigError(path + ".pressure_hpa", "must be positive");
  if (!(m.temperature_k > 0.0)) throw ConfigError(path + ".temperature_k", "must be positive");
  if (!(m.water_vapor_hpa >= 0.0)) throw ConfigError(path + ".water_vapor_hpa", "must be non-negative");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& source_name,
                              const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(source_name, static_cast<std::size_t>(e.mark.line) + 1,
                     static_cast<std::size_t>(e.mark.column) + 1, e.msg);
  }
  const YamlReader r(source_name);
  if (!root.IsMap()) throw ParseError(source_name, 1, 1, "scenario must be a mapping");
  r.check_keys(root, "", {"name", "tle", "start", "duration", "epoch_rate", "elevation_mask", "max_staleness_days",
                          "seed", "base", "trajectory", "ephemeris_error", "clocks", "atmosphere", "noise", "snr",
                          "carrier_frequency_hz", "solver", "methods"});
  for (const char* required : {"tle", "start", "duration", "base", "trajectory"}) {
    if (!root[required]) throw ParseError(source_name, 1, 1, std::string("missing required key '") + required + "'");
  }

  ScenarioConfig cfg;
  cfg.name = root["name"] ? r.text(root["name"], "name") : std::filesystem::path(source_name).stem().string();
  {
    const std::filesystem::path tle = r.text(root["tle"], "tle");
    cfg.tle_path = tle.is_absolute() ? tle : base_dir / tle;
  }
  try {
    cfg.start = UtcTime::parse_iso8601(r.text(root["start"], "start"));
  } catch (const std::invalid_argument& e) {
    r.fail(root["start"], std::string("invalid start epoch: ") + e.what());
  }
  r.read(root, "duration", "", cfg.duration);
  r.read(root, "epoch_rate", "", cfg.epoch_rate);
  r.read(root, "elevation_mask", "", cfg.elevation_mask);
  r.read(root, "max_staleness_days", "", cfg.max_staleness_days);
  r.read(root, "carrier_frequency_hz", "", cfg.carrier_frequency_hz);
  if (root["seed"]) {
    const long long seed = r.integer(root["seed"], "seed");
    if (seed < 0) throw ConfigError("seed", "must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.base = r.geodetic(root["base"], "base");
  const Vec3 base_ecef = geodetic_to_ecef(cfg.base);

  {
    const YAML::Node t = root["trajectory"];
    r.check_keys(t, "trajectory", {"speed", "waypoints", "waypoints_enu", "stationary"});
    r.read(t, "speed", "trajectory", cfg.trajectory.speed_mps);
    r.read(t, "stationary", "trajectory", cfg.trajectory.stationary);
    if (t["waypoints"] && t["waypoints_enu"]) r.fail(t, "use either trajectory.waypoints or trajectory.waypoints_enu");
    if (const YAML::Node w = t["waypoints"]) {
      if (!w.IsSequence()) r.fail(w, "'trajectory.waypoints' must be a sequence");
      for (std::size_t i = 0; i < w.size(); ++i) {
        cfg.trajectory.waypoints.push_back(r.geodetic(w[i], "trajectory.waypoints[" + std::to_string(i) + "]"));
      }
    } else if (const YAML::Node w = t["waypoints_enu"]) {
      if (!w.IsSequence()) r.fail(w, "'trajectory.waypoints_enu' must be a sequence");
      for (std::size_t i = 0; i < w.size(); ++i) {
        const std::string path = "trajectory.waypoints_enu[" + std::to_string(i) + "]";
        const YAML::Node p = w[i];
        if (!p.IsSequence() || (p.size() != 2 && p.size() != 3)) r.fail(p, "'" + path + "' must be [east, north, up]");
        EnuVector enu{r.number(p[0], path + "[0]"), r.number(p[1], path + "[1]"), 0.0};
        GeodeticCoord g = ecef_to_geodetic(base_ecef + enu_to_ecef_delta(enu, cfg.base));
        g.height_m = cfg.base.height_m + (p.size() == 3 ? r.number(p[2], path + "[2]") : 0.0);
        cfg.trajectory.waypoints.push_back(g);
      }
    } else {
      r.fail(t, "trajectory needs waypoints or waypoints_enu");
    }
  }

  if (const YAML::Node e = root["ephemeris_error"]) {
    r.check_keys(e, "ephemeris_error", {"position_tangential", "position_radial", "velocity_radial",
                                        "velocity_tangential", "randomize_sign", "per_satellite_jitter"});
    auto& s = cfg.ephemeris_error;
    if (e["position_tangential"]) s.position_tangential = r.range(e["position_tangential"], "ephemeris_error.position_tangential");
    if (e["position_radial"]) s.position_radial = r.range(e["position_radial"], "ephemeris_error.position_radial");
    if (e["velocity_radial"]) s.velocity_radial = r.range(e["velocity_radial"], "ephemeris_error.velocity_radial");
    if (e["velocity_tangential"]) s.velocity_tangential = r.range(e["velocity_tangential"], "ephemeris_error.velocity_tangential");
    r.read(e, "randomize_sign", "ephemeris_error", s.randomize_sign);
    r.read(e, "per_satellite_jitter", "ephemeris_error", s.per_satellite_jitter);
  }

  if (const YAML::Node c = root["clocks"]) {
    r.check_keys(c, "clocks", {"base", "ut", "satellite"});
    if (c["base"]) cfg.clocks.base = read_clock(r, c["base"], "clocks.base", cfg.clocks.base);
    if (c["ut"]) cfg.clocks.ut = read_clock(r, c["ut"], "clocks.ut", cfg.clocks.ut);
    if (c["satellite"]) cfg.clocks.satellite = read_clock(r, c["satellite"], "clocks.satellite", cfg.clocks.satellite);
  }

  {
    AtmosphereModel truth;
    truth.carrier_frequency_hz = cfg.carrier_frequency_hz;
    bool enabled = true;
    double mismatch = 0.05;
    std::optional<AtmosphereModel> solver_override;
    bool solver_enabled = true;
    if (const YAML::Node a = root["atmosphere"]) {
      r.check_keys(a, "atmosphere", {"enabled", "troposphere", "ionosphere", "pressure_hpa", "temperature_k",
                                     "water_vapor_hpa", "mismatch", "solver"});
      r.read(a, "enabled", "atmosphere", enabled);
      r.read(a, "mismatch", "atmosphere", mismatch);
      read_atmosphere_fields(r, a, "atmosphere", truth);
      if (!(mismatch > -1.0)) throw ConfigError("atmosphere.mismatch", "must exceed -1");
      if (const YAML::Node s = a["solver"]) {
        r.check_keys(s, "atmosphere.solver",
                     {"enabled", "troposphere", "ionosphere", "pressure_hpa", "temperature_k", "water_vapor_hpa"});
        r.read(s, "enabled", "atmosphere.solver", solver_enabled);
        AtmosphereModel m = truth;
        m.pressure_hpa *= 1.0 + mismatch;
        m.water_vapor_hpa *= 1.0 + mismatch;
        read_atmosphere_fields(r, s, "atmosphere.solver", m);
        solver_override = m;
      }
    }
    if (enabled && truth.enabled()) {
      cfg.atmosphere_truth = truth;
      AtmosphereModel solver = truth;
      solver.pressure_hpa *= 1.0 + mismatch;
      solver.water_vapor_hpa *= 1.0 + mismatch;
      if (solver_override) solver = *solver_override;
      if (solver_enabled && solver.enabled()) cfg.atmosphere_solver = solver;
    } else if (solver_override && solver_enabled && solver_override->enabled()) {
      cfg.atmosphere_solver = solver_override;
    }
  }

  if (const YAML::Node n = root["noise"]) {
    r.check_keys(n, "noise", {"std_hz", "snr_scaling"});
    r.read(n, "std_hz", "noise", cfg.noise.std_hz);
    r.read(n, "snr_scaling", "noise", cfg.noise.snr_scaling);
  }
  if (const YAML::Node s = root["snr"]) {
    r.check_keys(s, "snr", {"low_elevation_deg", "low_snr_db", "high_elevation_deg", "high_snr_db", "jitter_db"});
    r.read(s, "low_elevation_deg", "snr", cfg.snr.low_elevation_deg);
    r.read(s, "low_snr_db", "snr", cfg.snr.low_snr_db);
    r.read(s, "high_elevation_deg", "snr", cfg.snr.high_elevation_deg);
    r.read(s, "high_snr_db", "snr", cfg.snr.high_snr_db);
    r.read(s, "jitter_db", "snr", cfg.snr.jitter_db);
  }

  if (const YAML::Node s = root["solver"]) {
    r.check_keys(s, "solver", {"convergence_threshold", "max_iterations", "outer_correction_passes",
                               "reference_selection", "fixed_reference_id", "weight_floor", "condition_limit",
                               "divergence_window"});
    auto& v = cfg.solver;
    r.read(s, "convergence_threshold", "solver", v.convergence_threshold);
    r.read(s, "max_iterations", "solver", v.max_iterations);
    r.read(s, "outer_correction_passes", "solver", v.outer_correction_passes);
    r.read(s, "fixed_reference_id", "solver", v.fixed_reference_id);
    r.read(s, "weight_floor", "solver", v.weight_floor);
    r.read(s, "condition_limit", "solver", v.condition_limit);
    r.read(s, "divergence_window", "solver", v.divergence_window);
    if (const YAML::Node sel = s["reference_selection"]) {
      const std::string name = r.text(sel, "solver.reference_selection");
      if (name == "highest_elevation") v.reference_selection = ReferenceSelection::highest_elevation;
      else if (name == "max_snr") v.reference_selection = ReferenceSelection::max_snr;
      else if (name == "fixed_id") v.reference_selection = ReferenceSelection::fixed_id;
      else r.fail(sel, "solver.reference_selection must be highest_elevation, max_snr or fixed_id");
    }
  }
  cfg.solver.atmosphere_correction = cfg.atmosphere_solver;

  if (const YAML::Node m = root["methods"]) {
    if (!m.IsSequence()) r.fail(m, "'methods' must be a sequence");
    cfg.methods.clear();
    std::set<Method> seen;
    for (std::size_t i = 0; i < m.size(); ++i) {
      try {
        const Method method = method_from_string(r.text(m[i], "methods"));
        if (!seen.insert(method).second) r.fail(m[i], "duplicate method '" + m[i].Scalar() + "'");
        cfg.methods.push_back(method);
      } catch (const std::invalid_argument& e) {
        r.fail(m[i], e.what());
      }
    }
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw Error("scenario file '" + path.string() + "' not found");
  return parse_scenario(read_text_file(path), path.string(), path.parent_path());
}

RmseSummary rmse_neu(std::span<const EnuVector> errors) {
  if (errors.empty()) throw std::invalid_argument("rmse_neu: no samples");
  double n2 = 0.0, e2 = 0.0, u2 = 0.0, t2 = 0.0;
  for (const auto& v : errors) {
    n2 += v.north * v.north;
    e2 += v.east * v.east;
    u2 += v.up * v.up;
    t2 += v.north * v.north + v.east * v.east + v.up * v.up;
  }
  const double count = static_cast<double>(errors.size());
  RmseSummary s;
  s.north = std::sqrt(n2 / count);
  s.east = std::sqrt(e2 / count);
  s.up = std::sqrt(u2 / count);
  s.three_d = std::sqrt(t2 / count);
  s.epoch_count = errors.size();
  return s;
}

std::vector<OrbitState> estimated_states(std::span<const OrbitState> truth, const EphemerisErrorSpec& spec,
                                         std::uint64_t seed) {
  std::vector<OrbitState> out;
  out.reserve(truth.size());
  for (const auto& s : truth) out.push_back(inject_ephemeris_error(s, spec, seed));
  return out;
}

namespace {

std::vector<OrbitState> propagate_all(const KeplerPropagator& prop, const std::vector<TleRecord>& tles, UtcTime t) {
  std::vector<OrbitState> out;
  out.reserve(tles.size());
  for (const auto& tle : tles) out.push_back(prop.propagate(tle, t));
  return out;
}

constexpr std::uint64_t kBaseClockStream = 1;
constexpr std::uint64_t kUtClockStream = 2;
constexpr std::uint64_t kSatelliteClockStream = 3;

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, load_tle_file(cfg.tle_path)); }

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::vector<TleRecord>& constellation) {
  cfg.validate();
  ScenarioResult result;
  result.config = cfg;
  result.base_ecef = geodetic_to_ecef(cfg.base);
  const Trajectory traj = build_trajectory(cfg.trajectory, cfg.start, cfg.epoch_rate, cfg.duration);
  const KeplerPropagator prop(cfg.max_staleness_days);

  ReceiverSample base{ReceiverId::base, result.base_ecef, Vec3::Zero(),
                      draw_clock(cfg.clocks.base, cfg.start, cfg.seed, kBaseClockStream, 0)};
  ReceiverSample ut{ReceiverId::ut, Vec3::Zero(), Vec3::Zero(),
                    draw_clock(cfg.clocks.ut, cfg.start, cfg.seed, kUtClockStream, 0)};
  std::vector<ClockModel> sat_clocks;
  for (const auto& tle : constellation) {
    sat_clocks.push_back(draw_clock(cfg.clocks.satellite, cfg.start, cfg.seed, kSatelliteClockStream,
                                    static_cast<std::uint64_t>(tle.catalog_number)));
  }
  SynthesisModel model;
  model.atmosphere = cfg.atmosphere_truth;
  model.noise = cfg.noise;
  model.snr = cfg.snr;
  model.carrier_frequency_hz = cfg.carrier_frequency_hz;

  SolverConfig solver = cfg.solver;
  solver.atmosphere_correction = cfg.atmosphere_solver;

  std::vector<std::vector<EnuVector>> errors(cfg.methods.size());
  std::vector<std::size_t> converged(cfg.methods.size(), 0);
  std::size_t well_covered = 0;

  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    const TrajectorySample& truth = traj.samples[k];
    const std::vector<OrbitState> sats_true = propagate_all(prop, constellation, truth.epoch);
    const std::vector<OrbitState> sats_est = estimated_states(sats_true, cfg.ephemeris_error, cfg.seed);
    ut.position = truth.position;
    ut.velocity = truth.velocity;
    MeasurementSet meas = build_measurement_set(sats_true, sat_clocks, base, ut, model, cfg.elevation_mask,
                                                truth.epoch, {cfg.seed, k});

    EpochRecord rec;
    rec.index = k;
    rec.truth = truth;
    rec.n_common = meas.common_satellite_ids.size();
    if (rec.n_common >= 7) ++well_covered;
    const GeodeticCoord truth_geo = ecef_to_geodetic(truth.position);
    for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
      MethodEpoch me;
      me.solution = solve_epoch(cfg.methods[m], meas, sats_est, result.base_ecef, solver);
      if (me.solution.ok) {
        me.error = rotate_to_enu(me.solution.estimate.position - truth.position, truth_geo);
        errors[m].push_back(*me.error);
        if (me.solution.converged) ++converged[m];
      }
      rec.methods.push_back(std::move(me));
    }
    result.epochs.push_back(std::move(rec));
    result.measurements.push_back(std::move(meas));
  }

  const std::size_t total = traj.samples.size();
  for (std::size_t m = 0; m < cfg.methods.size(); ++m) {
    RmseSummary s;
    if (!errors[m].empty()) s = rmse_neu(errors[m]);
    s.method = cfg.methods[m];
    s.total_epochs = total;
    s.convergence_rate = total ? static_cast<double>(converged[m]) / static_cast<double>(total) : 0.0;
    result.summary.push_back(s);
    if (errors[m].size() < total) {
      result.warnings.push_back(std::string(to_string(cfg.methods[m])) + ": " +
                                std::to_string(total - errors[m].size()) + " of " + std::to_string(total) +
                                " epochs without a solution");
    }
  }
  if (total > 0 && static_cast<double>(well_covered) < 0.9 * static_cast<double>(total)) {
    result.warnings.push_back("fewer than 7 common satellites at " + std::to_string(total - well_covered) + " of " +
                              std::to_string(total) + " epochs");
  }
  return result;
}

std::vector<SolutionReport> solve_measurements(std::span<const MeasurementSet> epochs,
                                               const std::vector<TleRecord>& constellation, const Vec3& base_pos,
                                               std::span<const Method> methods, const SolverConfig& cfg,
                                               const EphemerisErrorSpec& ephemeris, std::uint64_t seed,
                                               double max_staleness_days) {
  const KeplerPropagator prop(max_staleness_days);
  std::vector<SolutionReport> reports;
  for (const Method m : methods) reports.push_back({m, {}});
  for (const auto& meas : epochs) {
    const std::vector<OrbitState> truth = propagate_all(prop, constellation, meas.epoch);
    const std::vector<OrbitState> est = estimated_states(truth, ephemeris, seed);
    for (std::size_t i = 0; i < methods.size(); ++i) {
      reports[i].epochs.push_back(solve_epoch(methods[i], meas, est, base_pos, cfg));
    }
  }
  return reports;
}

}  // namespace ddpose
