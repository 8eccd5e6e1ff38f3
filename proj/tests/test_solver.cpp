#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "ddpose/errors.hpp"
#include "ddpose/solver.hpp"
#include "support.hpp"

using namespace ddpose;

namespace {

struct QuietEpoch {
  UtcTime t;
  Vec3 base;
  PvState ut;
  std::vector<OrbitState> truth;  // visible to both receivers
  std::vector<OrbitState> est;
  MeasurementSet meas;
};

QuietEpoch make_epoch(const EphemerisErrorSpec& spec, const EnuVector& ut_offset, const EnuVector& ut_vel,
                      double at_seconds = 120.0) {
  QuietEpoch q;
  q.t = test::fixture_start().plus_seconds(at_seconds);
  q.base = geodetic_to_ecef(test::suwon());
  q.ut.position = q.base + enu_to_ecef_delta(ut_offset, test::suwon());
  q.ut.velocity = enu_to_ecef_delta(ut_vel, test::suwon());
  const KeplerPropagator prop;
  std::vector<OrbitState> all;
  for (const auto& r : test::constellation()) all.push_back(prop.propagate(r, q.t));
  for (const auto& s : all) {
    if (elevation_angle(s.position, q.base) > 15.0 && elevation_angle(s.position, q.ut.position) > 15.0) {
      q.truth.push_back(s);
    }
  }
  q.est = estimated_states(q.truth, spec, 99);
  SynthesisModel model;
  model.noise.std_hz = 0.0;
  model.snr.jitter_db = 0.0;
  const std::vector<ClockModel> clocks(q.truth.size());
  q.meas = build_measurement_set(q.truth, clocks, {ReceiverId::base, q.base, Vec3::Zero(), {}},
                                 {ReceiverId::ut, q.ut.position, q.ut.velocity, {}}, model, 15.0, q.t, {1, 0});
  return q;
}

}  // namespace

TEST_CASE("single and double differences") {
  Rng rng(derive_seed({21}));
  const Vec3 base = geodetic_to_ecef(test::suwon());
  const UtcTime t = test::fixture_start();
  const double lambda = wavelength_for(kDefaultCarrierFrequencyHz);
  const OrbitState sat = test::random_leo_state(rng, test::suwon(), 8);
  const Vec3 e = (sat.position - base).normalized();

  const auto b = DopplerMeasurement::from_range_rate(8, t, ReceiverId::base, -512.25, lambda, 10.0);
  const auto u_same = DopplerMeasurement::from_range_rate(8, t, ReceiverId::ut, -512.25, lambda, 10.0);
  CHECK(single_difference(u_same, b, sat, base) == doctest::Approx(sat.velocity.dot(e)).epsilon(1e-15));

  const double sat_clock = kSpeedOfLight * 3.3e-9;
  const auto u = DopplerMeasurement::from_range_rate(8, t, ReceiverId::ut, 1200.5, lambda, 10.0);
  const double sd = single_difference(u, b, sat, base);
  CHECK(std::abs(single_difference(u.shifted(-sat_clock), b.shifted(-sat_clock), sat, base) - sd) < 1e-12);
  // Term-by-term: rho_UT - rho_B + v_sat . e_B.
  CHECK(std::abs(sd - (1200.5 + 512.25 + sat.velocity.dot(e))) < 1e-10);

  const auto other = DopplerMeasurement::from_range_rate(9, t, ReceiverId::ut, 1.0, lambda, 10.0);
  CHECK_THROWS_AS(single_difference(other, b, sat, base), std::invalid_argument);
  const auto later = DopplerMeasurement::from_range_rate(8, t.plus_seconds(1.0), ReceiverId::ut, 1.0, lambda, 10.0);
  CHECK_THROWS_AS(single_difference(later, b, sat, base), std::invalid_argument);

  CHECK(double_difference(4.5, 4.5) == 0.0);
  const double rx_clock = kSpeedOfLight * 7.1e-9;
  CHECK(std::abs(double_difference(4.5 + rx_clock, -2.0 + rx_clock) - double_difference(4.5, -2.0)) < 1e-12);

  // Three satellites assembled by hand.
  std::vector<OrbitState> sats;
  std::vector<double> ub, uu;
  for (int i = 0; i < 3; ++i) {
    sats.push_back(test::random_leo_state(rng, test::suwon(), i));
    ub.push_back(uniform(rng, -6000, 6000));
    uu.push_back(uniform(rng, -6000, 6000));
  }
  std::vector<double> sds;
  for (int i = 0; i < 3; ++i) {
    sds.push_back(single_difference(DopplerMeasurement::from_range_rate(i, t, ReceiverId::ut, uu[i], lambda, 9.0),
                                    DopplerMeasurement::from_range_rate(i, t, ReceiverId::base, ub[i], lambda, 9.0),
                                    sats[i], base));
  }
  for (int l = 1; l < 3; ++l) {
    const double hand = (uu[0] - ub[0] + sats[0].velocity.dot((sats[0].position - base).normalized())) -
                        (uu[l] - ub[l] + sats[l].velocity.dot((sats[l].position - base).normalized()));
    CHECK(std::abs(double_difference(sds[0], sds[l]) - hand) < 1e-9);
  }
}

TEST_CASE("predicted double difference") {
  Rng rng(derive_seed({22}));
  const PvState x0{geodetic_to_ecef(test::suwon()), Vec3(4.0, 1.0, -2.0)};
  const OrbitState a = test::random_leo_state(rng, test::suwon(), 1);
  CHECK(predicted_double_difference(a, a, x0) == 0.0);

  // Mirror-image satellites about the local vertical with mirrored velocities.
  const Vec3 up = local_up(x0.position);
  const Vec3 east = enu_to_ecef_delta({1, 0, 0}, test::suwon());
  OrbitState s1, s2;
  s1.position = x0.position + 500e3 * up + 300e3 * east;
  s2.position = x0.position + 500e3 * up - 300e3 * east;
  s1.velocity = 7000.0 * east;
  s2.velocity = -7000.0 * east;
  const PvState rest{x0.position, Vec3::Zero()};
  CHECK(std::abs(predicted_double_difference(s1, s2, rest)) < 1e-9);

  for (int i = 0; i < 20; ++i) {
    const OrbitState p = test::random_leo_state(rng, test::suwon(), 2);
    const OrbitState q = test::random_leo_state(rng, test::suwon(), 3);
    const double oracle = geometric_range_rate(p, x0.position, x0.velocity) - geometric_range_rate(q, x0.position, x0.velocity);
    CHECK(std::abs(predicted_double_difference(p, q, x0) - oracle) < 1e-10);
  }
}

TEST_CASE("geometry matrix shape and finite-difference agreement") {
  Rng rng(derive_seed({23}));
  const PvState x0{geodetic_to_ecef(test::suwon()), Vec3(10.0, -3.0, 0.2)};
  std::vector<OrbitState> sats;
  for (int i = 0; i < 9; ++i) sats.push_back(test::random_leo_state(rng, test::suwon(), i));
  const Eigen::MatrixXd g = geometry_matrix(sats, x0, 2);
  CHECK(g.rows() == 8);
  CHECK(g.cols() == 6);

  std::vector<OrbitState> dup = sats;
  dup[5] = dup[2];
  CHECK(geometry_matrix(dup, x0, 2).row(4).norm() == 0.0);
  CHECK_THROWS_AS(geometry_matrix(std::span(sats).first(6), x0, 0), InsufficientSatellites);

  const Eigen::Matrix<double, 6, 1> steps = (Eigen::Matrix<double, 6, 1>() << 1.0, 1.0, 1.0, 1e-3, 1e-3, 1e-3).finished();
  for (int r = 0; r < 8; ++r) {
    const std::size_t l = r < 2 ? r : r + 1;
    for (int c = 0; c < 6; ++c) {
      Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
      d[c] = steps[c];
      const double fd = (predicted_double_difference(sats[2], sats[l], x0 + d) -
                         predicted_double_difference(sats[2], sats[l], x0 + (-d))) /
                        (2.0 * steps[c]);
      CHECK(std::abs(fd - g(r, c)) <= 1e-6 * std::max(std::abs(g(r, c)), 1e-6));
    }
  }
}

TEST_CASE("snr weights") {
  const std::vector<double> zeros(3, 0.0);
  const std::vector<double> same{4.0, 4.0, 4.0};
  CHECK(snr_weight_matrix(same, same) == Eigen::VectorXd::Ones(3));

  const auto w1 = snr_weight_matrix(std::vector<double>{0, 1, 2}, zeros);
  CHECK(w1[0] == doctest::Approx(1.0));
  CHECK(w1[1] == doctest::Approx(0.5));
  CHECK(w1[2] == doctest::Approx(0.0));

  const auto w2 = snr_weight_matrix(std::vector<double>{3, -1, 1, 0}, std::vector<double>(4, 0.0));
  CHECK(w2[0] == doctest::Approx(0.0));
  CHECK(w2[1] == doctest::Approx(1.0));
  CHECK(w2[2] == doctest::Approx(0.5));
  CHECK(w2[3] == doctest::Approx(0.75));

  // Only the difference of the two receivers matters.
  const auto w3 = snr_weight_matrix(std::vector<double>{13, 9, 11, 10}, std::vector<double>(4, 10.0));
  CHECK((w3 - w2).norm() < 1e-15);
  CHECK(snr_weight_matrix(std::vector<double>{0, 1, 2}, zeros, 0.1)[2] == doctest::Approx(0.1));
  CHECK_THROWS(snr_weight_matrix(std::vector<double>{1.0}, zeros));
}

TEST_CASE("weighted least squares update") {
  Rng rng(derive_seed({24}));
  Eigen::MatrixXd g(12, 6);
  Eigen::VectorXd dz(12), w(12);
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 6; ++j) g(i, j) = uniform(rng, -1.0, 1.0);
    dz[i] = uniform(rng, -5.0, 5.0);
    w[i] = uniform(rng, 0.1, 1.0);
  }
  CHECK((wls_update(g, Eigen::VectorXd::Ones(12), dz) - ls_update(g, dz)).norm() == 0.0);

  const Eigen::VectorXd qr_ls = g.householderQr().solve(dz);
  CHECK((ls_update(g, dz) - qr_ls).norm() < 1e-8 * qr_ls.norm());
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::VectorXd qr_wls = (sw.asDiagonal() * g).colPivHouseholderQr().solve(sw.asDiagonal() * dz);
  CHECK((wls_update(g, w, dz) - qr_wls).norm() < 1e-8 * qr_wls.norm());

  Eigen::MatrixXd sq(6, 6);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) sq(i, j) = uniform(rng, -1.0, 1.0) + (i == j ? 3.0 : 0.0);
  Eigen::VectorXd truth(6);
  truth << 1.0, -2.0, 3.5, 0.25, -0.5, 9.0;
  CHECK((ls_update(sq, sq * truth) - truth).norm() < 1e-9 * truth.norm());

  Eigen::MatrixXd singular = g;
  singular.col(5) = singular.col(4);
  CHECK_THROWS_AS(ls_update(singular, dz), GeometryError);
  CHECK_THROWS_AS(ls_update(g.topRows(5), dz.head(5)), InsufficientSatellites);
}

TEST_CASE("gauss-newton iteration") {
  const QuietEpoch q = make_epoch({}, {800.0, 1500.0, 0.0}, {-9.0, 7.0, 0.0});
  const auto obs = align_observations(q.meas, q.est);
  REQUIRE(obs.size() >= 8);
  std::vector<OrbitState> sats;
  std::vector<double> sd;
  for (const auto& o : obs) {
    sats.push_back(o.sat_est);
    sd.push_back(o.ut_rate - o.base_rate + o.sat_est.velocity.dot((o.sat_est.position - q.base).normalized()));
  }
  SolverConfig cfg;
  const std::size_t ref = select_reference(obs, {q.base, Vec3::Zero()}, cfg);
  const IterationResult r = iterate_position(sats, sd, {}, ref, {q.base, Vec3::Zero()}, cfg);
  CHECK(r.converged);
  CHECK((r.estimate.position - q.ut.position).norm() < 1e-3);
  CHECK((r.estimate.velocity - q.ut.velocity).norm() < 1e-4);

  const IterationResult fixed = iterate_position(sats, sd, {}, ref, q.ut, cfg);
  CHECK(fixed.iterations == 1);
  CHECK(fixed.last_update_norm < cfg.convergence_threshold);

  CHECK_THROWS_AS(iterate_position(std::span(sats).first(6), std::span(sd).first(6), {}, 0, q.ut, cfg),
                  InsufficientSatellites);
}

TEST_CASE("ephemeris error correction") {
  SUBCASE("no injected error") {
    const QuietEpoch q = make_epoch({}, {1000.0, 2000.0, 0.0}, {5.0, -6.0, 0.0});
    for (const auto& o : align_observations(q.meas, q.est)) {
      const EphemerisCorrection c = ephemeris_error_correction(o.sat_est, q.base, o.base_rate, o.ut_rate, q.ut);
      CHECK(c.valid);
      CHECK(std::abs(c.position_error) < 1.0);
      CHECK(std::abs(c.ut_rate_error) < 1e-3);
    }
  }

  SUBCASE("3 km tangential error") {
    EphemerisErrorSpec spec;
    spec.position_tangential = MagnitudeRange::fixed(3000.0);
    const QuietEpoch q = make_epoch(spec, {1000.0, 2000.0, 0.0}, {5.0, -6.0, 0.0});
    const auto obs = align_observations(q.meas, q.est);
    REQUIRE(obs.size() >= 8);
    for (const auto& o : obs) {
      const EphemerisCorrection c = ephemeris_error_correction(o.sat_est, q.base, o.base_rate, o.ut_rate, q.ut);
      REQUIRE(c.valid);
      CHECK(std::abs(std::abs(c.position_error) - 3000.0) <= 0.05 * 3000.0);
      const double predicted = predicted_range_rate(o.sat_est, q.ut);
      const double before = std::abs(o.ut_rate - predicted);
      const double after = std::abs(o.ut_rate - c.ut_rate_error - predicted);
      CHECK(after * 10.0 <= before);
    }
  }

  OrbitState still;
  still.position = Vec3(7e6, 0, 0);
  CHECK_FALSE(ephemeris_error_correction(still, geodetic_to_ecef({0, 0, 0}), 0.0, 0.0, {}).valid);
}

TEST_CASE("method pipelines") {
  EphemerisErrorSpec spec;
  spec.position_tangential = MagnitudeRange::fixed(3000.0);
  const QuietEpoch q = make_epoch(spec, {1500.0, 2500.0, 0.0}, {8.0, 4.0, 0.0});
  SolverConfig base_cfg;

  SolverConfig bypass = config_for(Method::dd3pose_wls, base_cfg);
  bypass.correction_enabled = false;
  const EpochSolution off = solve_3dpose(q.meas, q.est, q.base, bypass);
  const EpochSolution vanilla = solve_epoch(Method::vanilla_dd, q.meas, q.est, q.base, base_cfg);
  REQUIRE(off.ok);
  CHECK(off.estimate.position == vanilla.estimate.position);
  CHECK(off.estimate.velocity == vanilla.estimate.velocity);

  const EpochSolution corrected = solve_epoch(Method::dd3pose_ls, q.meas, q.est, q.base, base_cfg);
  REQUIRE(corrected.ok);
  CHECK((corrected.estimate.position - q.ut.position).norm() < (vanilla.estimate.position - q.ut.position).norm());
  CHECK(corrected.correction_magnitudes.size() == corrected.n_sats);

  // Terminal co-located with the base and at rest.
  const QuietEpoch zero = make_epoch({}, {0.0, 0.0, 0.0}, {0.0, 0.0, 0.0});
  const EpochSolution d = solve_epoch(Method::differential, zero.meas, zero.est, zero.base, base_cfg);
  REQUIRE(d.ok);
  CHECK((d.estimate.position - zero.base).norm() < 1e-3);

  MeasurementSet few = q.meas;
  few.common_satellite_ids.resize(6);
  const EpochSolution gap = solve_epoch(Method::dd3pose_ls, few, q.est, q.base, base_cfg);
  CHECK_FALSE(gap.ok);
  CHECK(gap.failure.find("insufficient") != std::string::npos);

  CHECK(method_from_string("3dpose_wls") == Method::dd3pose_wls);
  CHECK(to_string(Method::differential) == "differential");
  CHECK_THROWS(method_from_string("kalman"));
  SolverConfig bad;
  bad.convergence_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
