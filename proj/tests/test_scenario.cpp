#include <doctest.h>

#include <cmath>
#include <string>

#include "ddpose/errors.hpp"
#include "ddpose/exchange.hpp"
#include "ddpose/reports.hpp"
#include "ddpose/scenario.hpp"
#include "support.hpp"

using namespace ddpose;

namespace {

const std::string kMinimal = R"(tle: starlink_118.tle
start: 2024-05-01T03:00:00Z
duration: 60
base: {latitude: 37.282268, longitude: 127.043524, height: 40}
trajectory:
  speed: 10
  waypoints_enu: [[0, 0], [600, 0]]
)";

ScenarioConfig parse(const std::string& text) { return parse_scenario(text, "inline.yaml", test::data_dir()); }

}  // namespace

TEST_CASE("minimal scenario fills defaults") {
  const ScenarioConfig cfg = parse(kMinimal);
  CHECK(cfg.solver.convergence_threshold == 1e-4);
  CHECK(cfg.elevation_mask == 15.0);
  CHECK(cfg.noise.std_hz == 0.1);
  CHECK(cfg.epoch_rate == 1.0);
  CHECK(cfg.carrier_frequency_hz == 11.325e9);
  CHECK(cfg.methods == all_methods());
  CHECK(cfg.tle_path == test::data_dir() / "starlink_118.tle");
  CHECK(cfg.trajectory.waypoints.size() == 2);
  CHECK(cfg.atmosphere_truth.has_value());
  REQUIRE(cfg.atmosphere_solver.has_value());
  CHECK(cfg.atmosphere_solver->pressure_hpa == doctest::Approx(cfg.atmosphere_truth->pressure_hpa * 1.05));
}

TEST_CASE("scenario validation errors") {
  std::string negative = kMinimal;
  negative.replace(negative.find("duration: 60"), 12, "duration: -5");
  try {
    parse(negative);
    FAIL("expected a validation error");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "duration");
  }

  try {
    parse(kMinimal + "colour: blue\n");
    FAIL("expected an unknown-key error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 8);
    CHECK(std::string(e.what()).find("colour") != std::string::npos);
  }

  CHECK_THROWS_AS(parse("tle: x.tle\nstart: 2024-05-01T03:00:00Z\n"), ParseError);
  CHECK_THROWS_AS(parse(kMinimal + "solver: {reference_selection: sideways}\n"), Error);
  CHECK_THROWS_AS(parse(kMinimal + "methods: [kalman]\n"), Error);
  CHECK_THROWS_AS(parse(kMinimal + "ephemeris_error: {position_tangential: [3000, 2000]}\n"), ConfigError);
  CHECK_THROWS_AS(load_scenario(test::data_dir() / "missing.yaml"), Error);
  CHECK_THROWS_AS(parse("a: [1, 2"), ParseError);
}

TEST_CASE("trajectories") {
  const GeodeticCoord g = test::suwon();
  const Vec3 base = geodetic_to_ecef(g);
  TrajectorySpec coincident{{g, g}, 10.0, false};
  CHECK_THROWS_AS(build_trajectory(coincident, test::fixture_start(), 1.0, 100.0), ConfigError);

  const GeodeticCoord km_east = ecef_to_geodetic(base + enu_to_ecef_delta({1000.0, 0.0, 0.0}, g));
  TrajectorySpec straight{{g, km_east}, 10.0, false};
  const Trajectory tr = build_trajectory(straight, test::fixture_start(), 1.0, 600.0);
  REQUIRE(tr.samples.size() == 101);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    CHECK(std::abs((tr.samples[i].position - tr.samples[i - 1].position).norm() - 10.0) < 0.01);
    CHECK(tr.samples[i].epoch.seconds_since(tr.samples[i - 1].epoch) == doctest::Approx(1.0));
  }
  CHECK(tr.samples.front().velocity.norm() == doctest::Approx(10.0));

  TrajectorySpec still{{g}, 0.0, true};
  const Trajectory parked = build_trajectory(still, test::fixture_start(), 2.0, 10.0);
  CHECK(parked.samples.size() == 21);
  CHECK(parked.samples.back().velocity.norm() == 0.0);

  const ScenarioConfig s1 = load_scenario(test::data_dir() / "scenarios" / "scenario_1.yaml");
  CHECK(std::abs(path_length(s1.trajectory) - 3720.0) <= 50.0);

  const ScenarioConfig s3 = load_scenario(test::data_dir() / "scenarios" / "scenario_3.yaml");
  const Trajectory t3 = build_trajectory(s3.trajectory, s3.start, s3.epoch_rate, s3.duration);
  const Vec3 b3 = geodetic_to_ecef(s3.base);
  for (const auto& s : t3.samples) {
    const EnuVector d = ecef_to_enu(s.position, s3.base);
    const double ground = std::hypot(d.east, d.north);
    CHECK(ground >= 33540.0);
    CHECK(ground <= 35760.0);
    CHECK((s.position - b3).norm() >= 33540.0);
    CHECK((s.position - b3).norm() <= 35760.0);
  }
}

TEST_CASE("rmse accumulation") {
  const std::vector<EnuVector> zeros(4);
  const RmseSummary z = rmse_neu(zeros);
  CHECK(z.three_d == 0.0);
  CHECK(z.north == 0.0);

  const std::vector<EnuVector> east(5, EnuVector{1.0, 0.0, 0.0});
  const RmseSummary e = rmse_neu(east);
  CHECK(e.east == doctest::Approx(1.0));
  CHECK(e.north == 0.0);
  CHECK(e.up == 0.0);
  CHECK(e.three_d == doctest::Approx(1.0));

  Rng rng(derive_seed({31}));
  std::vector<EnuVector> mixed;
  double sn = 0, se = 0, su = 0;
  for (int i = 0; i < 37; ++i) {
    mixed.push_back({uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -9, 9)});
    se += mixed.back().east * mixed.back().east;
    sn += mixed.back().north * mixed.back().north;
    su += mixed.back().up * mixed.back().up;
  }
  const RmseSummary m = rmse_neu(mixed);
  CHECK(m.north == doctest::Approx(std::sqrt(sn / 37)).epsilon(1e-14));
  CHECK(m.east == doctest::Approx(std::sqrt(se / 37)).epsilon(1e-14));
  CHECK(m.up == doctest::Approx(std::sqrt(su / 37)).epsilon(1e-14));
  CHECK(m.three_d == doctest::Approx(std::sqrt((sn + se + su) / 37)).epsilon(1e-14));
  CHECK(m.epoch_count == 37);
  CHECK_THROWS_AS(rmse_neu(std::vector<EnuVector>{}), std::invalid_argument);
}

TEST_CASE("noiseless exactness and determinism") {
  const ScenarioConfig cfg = test::quiet_scenario(1500.0, 20.0);
  const ScenarioResult a = run_scenario(cfg, test::constellation());
  REQUIRE(a.epochs.size() == 21);
  for (const auto& rec : a.epochs) {
    for (const auto& m : rec.methods) {
      REQUIRE(m.error.has_value());
      CHECK(m.error->norm() < 1e-3);
    }
  }

  ScenarioConfig noisy = load_scenario(test::data_dir() / "scenarios" / "scenario_1.yaml");
  noisy.duration = 15.0;
  const ScenarioResult r1 = run_scenario(noisy, test::constellation());
  const ScenarioResult r2 = run_scenario(noisy, test::constellation());
  CHECK(format_estimates_csv(estimate_rows(r1)) == format_estimates_csv(estimate_rows(r2)));
  noisy.seed += 1;
  const ScenarioResult r3 = run_scenario(noisy, test::constellation());
  CHECK(format_estimates_csv(estimate_rows(r1)) != format_estimates_csv(estimate_rows(r3)));
}

TEST_CASE("3dpose beats vanilla double difference under ephemeris error") {
  ScenarioConfig cfg = test::quiet_scenario(1500.0, 30.0);
  cfg.ephemeris_error.position_tangential = {2000.0, 3000.0};
  cfg.methods = {Method::vanilla_dd, Method::dd3pose_ls};
  const ScenarioResult r = run_scenario(cfg, test::constellation());
  REQUIRE(r.summary.size() == 2);
  CHECK(r.summary[1].three_d < r.summary[0].three_d);
  CHECK(r.summary[0].convergence_rate == 1.0);
}

TEST_CASE("exchange round trip") {
  const ScenarioConfig cfg = test::quiet_scenario(900.0, 4.0);
  const ScenarioResult r = run_scenario(cfg, test::constellation());
  ExchangeFile f;
  f.base_position = r.base_ecef;
  f.epochs = r.measurements;
  f.truth = truth_samples(r);
  const std::string text = format_exchange(f);
  const ExchangeFile back = parse_exchange(text, "mem");
  REQUIRE(back.epochs.size() == f.epochs.size());
  CHECK(back.base_position == f.base_position);
  CHECK(back.record_count() == f.record_count());
  for (std::size_t k = 0; k < f.epochs.size(); ++k) {
    CHECK(back.epochs[k].common_satellite_ids == f.epochs[k].common_satellite_ids);
    for (std::size_t i = 0; i < f.epochs[k].ut.size(); ++i) {
      CHECK(back.epochs[k].ut[i].doppler_shift() == f.epochs[k].ut[i].doppler_shift());
      CHECK(back.epochs[k].ut[i].pseudorange_rate() == f.epochs[k].ut[i].pseudorange_rate());
    }
  }
  CHECK(back.truth.size() == f.truth.size());
  CHECK(format_exchange(back) == text);

  // Chop the trailer and part of the last record.
  const std::string truncated = text.substr(0, text.size() - 40);
  try {
    parse_exchange(truncated, "cut.csv");
    FAIL("expected a truncation error");
  } catch (const ParseError& e) {
    CHECK(e.line() > 0);
  }
}
