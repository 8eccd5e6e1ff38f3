#pragma once

#include <filesystem>
#include <vector>

#include "ddpose/frames.hpp"
#include "ddpose/measurements.hpp"
#include "ddpose/orbits.hpp"
#include "ddpose/random.hpp"
#include "ddpose/scenario.hpp"
#include "ddpose/tle.hpp"

namespace ddpose::test {

inline std::filesystem::path data_dir() { return DDPOSE_TEST_DATA_DIR; }

inline const std::vector<TleRecord>& constellation() {
  static const std::vector<TleRecord> records = load_tle_file(data_dir() / "starlink_118.tle");
  return records;
}

inline UtcTime fixture_start() { return UtcTime::parse_iso8601("2024-05-01T03:00:00Z"); }

inline GeodeticCoord suwon() { return {37.282268, 127.043524, 40.0}; }

/// Error-free receiver/satellite configuration with a straight moving terminal.
inline ScenarioConfig quiet_scenario(double north_offset_m, double duration_s) {
  ScenarioConfig cfg;
  cfg.name = "quiet";
  cfg.tle_path = data_dir() / "starlink_118.tle";
  cfg.start = fixture_start();
  cfg.base = suwon();
  cfg.duration = duration_s;
  const Vec3 base = geodetic_to_ecef(cfg.base);
  auto waypoint = [&](double e, double n) {
    GeodeticCoord g = ecef_to_geodetic(base + enu_to_ecef_delta({e, n, 0.0}, cfg.base));
    g.height_m = cfg.base.height_m;
    return g;
  };
  cfg.trajectory.waypoints = {waypoint(0.0, north_offset_m), waypoint(3000.0, north_offset_m + 600.0)};
  cfg.trajectory.speed_mps = 12.0;
  const ClockRanges zero{0.0, 0.0, 0.0};
  cfg.clocks = {zero, zero, zero};
  cfg.noise.std_hz = 0.0;
  cfg.snr.jitter_db = 0.0;
  cfg.atmosphere_truth.reset();
  cfg.atmosphere_solver.reset();
  cfg.solver.atmosphere_correction.reset();
  return cfg;
}

/// Plausible LEO state above `receiver`: position at 550 km altitude offset by
/// horizontal angles, velocity of orbital magnitude in a random horizontal direction.
inline OrbitState random_leo_state(Rng& rng, const GeodeticCoord& receiver, int id) {
  GeodeticCoord g = receiver;
  g.latitude_deg += uniform(rng, -9.0, 9.0);
  g.longitude_deg += uniform(rng, -11.0, 11.0);
  g.height_m = 550e3 + uniform(rng, -5e3, 5e3);
  OrbitState s;
  s.satellite_id = id;
  s.position = geodetic_to_ecef(g);
  const Vec3 up = s.position.normalized();
  Vec3 any(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  const Vec3 horizontal = (any - any.dot(up) * up).normalized();
  s.velocity = 7585.0 * horizontal + uniform(rng, -20.0, 20.0) * up;
  return s;
}

}  // namespace ddpose::test
