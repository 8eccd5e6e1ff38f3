#include "ddpose/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "ddpose/errors.hpp"

namespace ddpose {

Eigen::Matrix<double, 6, 1> PvState::stacked() const {
  Eigen::Matrix<double, 6, 1> s;
  s << position, velocity;
  return s;
}

PvState PvState::operator+(const Eigen::Matrix<double, 6, 1>& delta) const {
  return {position + delta.head<3>(), velocity + delta.tail<3>()};
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::differential: return "differential";
    case Method::vanilla_dd: return "vanilla_dd";
    case Method::dd3pose_ls: return "3dpose_ls";
    case Method::dd3pose_wls: return "3dpose_wls";
  }
  return "unknown";
}

Method method_from_string(std::string_view text) {
  for (const Method m : all_methods()) {
    if (text == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method '" + std::string(text) +
                              "' (expected differential, vanilla_dd, 3dpose_ls or 3dpose_wls)");
}

std::vector<Method> all_methods() {
  return {Method::differential, Method::vanilla_dd, Method::dd3pose_ls, Method::dd3pose_wls};
}

void SolverConfig::validate() const {
  if (!(convergence_threshold > 0.0)) throw ConfigError("solver.convergence_threshold", "must be positive");
  if (max_iterations < 1) throw ConfigError("solver.max_iterations", "must be at least 1");
  if (outer_correction_passes < 0) throw ConfigError("solver.outer_correction_passes", "must be non-negative");
  if (!(weight_floor >= 0.0 && weight_floor <= 1.0)) throw ConfigError("solver.weight_floor", "must lie in [0, 1]");
  if (!(condition_limit > 1.0)) throw ConfigError("solver.condition_limit", "must exceed 1");
  if (divergence_window < 1) throw ConfigError("solver.divergence_window", "must be at least 1");
}

SolverConfig config_for(Method m, SolverConfig cfg) {
  switch (m) {
    case Method::differential:
      cfg.weight_mode = WeightMode::identity;
      cfg.correction_enabled = false;
      break;
    case Method::vanilla_dd:
      cfg.weight_mode = WeightMode::snr;
      cfg.correction_enabled = false;
      break;
    case Method::dd3pose_ls:
      cfg.weight_mode = WeightMode::identity;
      cfg.correction_enabled = true;
      break;
    case Method::dd3pose_wls:
      cfg.weight_mode = WeightMode::snr;
      cfg.correction_enabled = true;
      break;
  }
  return cfg;
}

namespace {

Vec3 unit_los(const Vec3& sat, const Vec3& rx) {
  const Vec3 d = sat - rx;
  const double n = d.norm();
  if (!(n > 0.0)) throw GeometryError("satellite and receiver positions coincide");
  return d / n;
}

double single_difference_value(double ut_rate, double base_rate, const OrbitState& sat_est, const Vec3& base_pos) {
  return ut_rate - base_rate + sat_est.velocity.dot(unit_los(sat_est.position, base_pos));
}

}  // namespace

double single_difference(const DopplerMeasurement& ut, const DopplerMeasurement& base, const OrbitState& sat_est,
                         const Vec3& base_pos) {
  if (ut.satellite_id() != base.satellite_id() || ut.satellite_id() != sat_est.satellite_id) {
    throw std::invalid_argument("single_difference: satellite ids differ");
  }
  if (ut.epoch() != base.epoch()) throw std::invalid_argument("single_difference: epochs differ");
  return single_difference_value(ut.pseudorange_rate(), base.pseudorange_rate(), sat_est, base_pos);
}

double predicted_range_rate(const OrbitState& sat_est, const PvState& x0) {
  return (sat_est.velocity - x0.velocity).dot(unit_los(sat_est.position, x0.position));
}

double predicted_double_difference(const OrbitState& sat_ref_est, const OrbitState& sat_l_est, const PvState& x0) {
  return predicted_range_rate(sat_ref_est, x0) - predicted_range_rate(sat_l_est, x0);
}

Eigen::Matrix<double, 1, 6> range_rate_partials(const OrbitState& sat_est, const PvState& x0) {
  const Vec3 d = sat_est.position - x0.position;
  const double rho = d.norm();
  if (!(rho > 0.0)) throw GeometryError("satellite and receiver positions coincide");
  const Vec3 e = d / rho;
  const Vec3 dv = sat_est.velocity - x0.velocity;
  const Vec3 g = (e * e.dot(dv) - dv) / rho;
  Eigen::Matrix<double, 1, 6> row;
  row << g.transpose(), -e.transpose();
  return row;
}

Eigen::MatrixXd geometry_matrix(std::span<const OrbitState> sats_est, const PvState& x0, std::size_t ref_index) {
  const std::size_t n = sats_est.size();
  if (n < 7) throw InsufficientSatellites(n, 7);
  if (ref_index >= n) throw std::out_of_range("geometry_matrix: reference index out of range");
  const Eigen::Matrix<double, 1, 6> ref = range_rate_partials(sats_est[ref_index], x0);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(n - 1), 6);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == ref_index) continue;
    g.row(row++) = ref - range_rate_partials(sats_est[i], x0);
  }
  return g;
}

Eigen::VectorXd snr_weight_matrix(std::span<const double> s_base, std::span<const double> s_ut, double floor) {
  if (s_base.size() != s_ut.size()) throw std::invalid_argument("snr_weight_matrix: length mismatch");
  const auto n = static_cast<Eigen::Index>(s_base.size());
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = s_base[i] - s_ut[i];
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  if (n == 0) return w;
  const double hi = s.maxCoeff(), lo = s.minCoeff();
  if (hi > lo) w = (hi - s.array()) / (hi - lo);
  return w.cwiseMax(floor);
}

double condition_indicator(const Eigen::MatrixXd& normal) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  const auto& ev = eig.eigenvalues();
  if (ev.size() == 0 || !(ev.minCoeff() > 0.0)) return std::numeric_limits<double>::infinity();
  return ev.maxCoeff() / ev.minCoeff();
}

Eigen::VectorXd wls_update(const Eigen::MatrixXd& g, const Eigen::VectorXd& weights, const Eigen::VectorXd& dz,
                           double condition_limit, double* condition_out) {
  if (g.rows() != dz.size() || g.rows() != weights.size()) {
    throw std::invalid_argument("wls_update: dimension mismatch");
  }
  if (g.rows() < g.cols()) throw InsufficientSatellites(static_cast<std::size_t>(g.rows()), g.cols());
  const Eigen::MatrixXd gtw = g.transpose() * weights.asDiagonal();
  const Eigen::MatrixXd normal = gtw * g;
  const double cond = condition_indicator(normal);
  if (condition_out) *condition_out = cond;
  if (!(cond <= condition_limit)) {
    throw GeometryError("normal matrix is ill-conditioned (condition indicator " + std::to_string(cond) + ")");
  }
  return normal.ldlt().solve(gtw * dz);
}

Eigen::VectorXd ls_update(const Eigen::MatrixXd& g, const Eigen::VectorXd& dz, double condition_limit) {
  return wls_update(g, Eigen::VectorXd::Ones(g.rows()), dz, condition_limit);
}

std::vector<SatelliteObservation> align_observations(const MeasurementSet& meas, std::span<const OrbitState> sats_est) {
  std::vector<SatelliteObservation> out;
  out.reserve(meas.common_satellite_ids.size());
  for (const int id : meas.common_satellite_ids) {
    const auto it = std::find_if(sats_est.begin(), sats_est.end(), [id](const OrbitState& s) { return s.satellite_id == id; });
    if (it == sats_est.end()) continue;
    const DopplerMeasurement* b = meas.find(ReceiverId::base, id);
    const DopplerMeasurement* u = meas.find(ReceiverId::ut, id);
    if (!b || !u) continue;
    out.push_back({*it, b->pseudorange_rate(), u->pseudorange_rate(), b->snr(), u->snr()});
  }
  return out;
}

void apply_atmosphere_correction(std::vector<SatelliteObservation>& obs, const AtmosphereModel& model,
                                 const Vec3& base_pos, const PvState& ut_guess, UtcTime epoch) {
  if (!model.enabled()) return;
  for (auto& o : obs) {
    const Vec3& p = o.sat_est.position;
    const Vec3& v = o.sat_est.velocity;
    if (elevation_angle(p, base_pos) > 0.0) {
      o.base_rate -= slant_delay_rate(model, p, v, base_pos, Vec3::Zero(), epoch);
    }
    if (elevation_angle(p, ut_guess.position) > 0.0) {
      o.ut_rate -= slant_delay_rate(model, p, v, ut_guess.position, ut_guess.velocity, epoch);
    }
  }
}

std::size_t select_reference(std::span<const SatelliteObservation> obs, const PvState& x0, const SolverConfig& cfg) {
  if (obs.empty()) throw InsufficientSatellites(0, 1);
  std::size_t best = 0;
  switch (cfg.reference_selection) {
    case ReferenceSelection::highest_elevation: {
      double best_el = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < obs.size(); ++i) {
        const double el = elevation_angle(obs[i].sat_est.position, x0.position);
        if (el > best_el) best_el = el, best = i;
      }
      return best;
    }
    case ReferenceSelection::max_snr: {
      for (std::size_t i = 1; i < obs.size(); ++i) {
        if (obs[i].ut_snr > obs[best].ut_snr) best = i;
      }
      return best;
    }
    case ReferenceSelection::fixed_id: {
      for (std::size_t i = 0; i < obs.size(); ++i) {
        if (obs[i].sat_est.satellite_id == cfg.fixed_reference_id) return i;
      }
      throw InsufficientSatellites(0, 1);
    }
  }
  return best;
}

namespace {

struct Linearization {
  Eigen::VectorXd dz;
  Eigen::MatrixXd g;
};

struct GaussNewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double residual_rms = 0.0;
  double condition = 0.0;
  double last_update_norm = 0.0;
};

GaussNewtonResult gauss_newton(const std::function<Linearization(const Eigen::VectorXd&)>& linearize,
                               Eigen::VectorXd x, const Eigen::VectorXd& weights, const SolverConfig& cfg) {
  GaussNewtonResult r;
  double previous = std::numeric_limits<double>::infinity();
  int growth = 0;
  for (int k = 1; k <= cfg.max_iterations; ++k) {
    const Linearization lin = linearize(x);
    const Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(lin.dz.size()) : weights;
    const Eigen::VectorXd delta = wls_update(lin.g, w, lin.dz, cfg.condition_limit, &r.condition);
    x += delta;
    r.iterations = k;
    const double norm = delta.norm();
    r.last_update_norm = norm;
    if (!std::isfinite(norm)) {
      r.diverged = true;
      break;
    }
    if (norm < cfg.convergence_threshold) {
      r.converged = true;
      break;
    }
    growth = norm > previous ? growth + 1 : 0;
    previous = norm;
    if (growth >= cfg.divergence_window) {
      r.diverged = true;
      break;
    }
  }
  r.x = x;
  const Eigen::VectorXd dz = linearize(x).dz;
  r.residual_rms = dz.size() > 0 ? std::sqrt(dz.squaredNorm() / static_cast<double>(dz.size())) : 0.0;
  return r;
}

}  // namespace

IterationResult iterate_position(std::span<const OrbitState> sats_est, std::span<const double> single_differences,
                                 const Eigen::VectorXd& row_weights, std::size_t ref_index, const PvState& x_init,
                                 const SolverConfig& cfg) {
  const std::size_t n = sats_est.size();
  if (single_differences.size() != n) throw std::invalid_argument("iterate_position: one single difference per satellite");
  if (n < 7) throw InsufficientSatellites(n, 7);
  if (ref_index >= n) throw std::out_of_range("iterate_position: reference index out of range");
  if (row_weights.size() != 0 && static_cast<std::size_t>(row_weights.size()) != n - 1) {
    throw std::invalid_argument("iterate_position: one weight per double difference");
  }

  Eigen::VectorXd z(static_cast<Eigen::Index>(n - 1));
  {
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i != ref_index) z[row++] = double_difference(single_differences[ref_index], single_differences[i]);
    }
  }
  const auto to_pv = [](const Eigen::VectorXd& x) {
    return PvState{x.head<3>(), x.segment<3>(3)};
  };
  const auto linearize = [&](const Eigen::VectorXd& x) {
    const PvState pv = to_pv(x);
    Linearization lin;
    lin.dz.resize(z.size());
    const double ref_pred = predicted_range_rate(sats_est[ref_index], pv);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == ref_index) continue;
      lin.dz[row] = z[row] - (ref_pred - predicted_range_rate(sats_est[i], pv));
      ++row;
    }
    lin.g = geometry_matrix(sats_est, pv, ref_index);
    return lin;
  };

  const GaussNewtonResult gn = gauss_newton(linearize, x_init.stacked(), row_weights, cfg);
  IterationResult out;
  out.estimate = to_pv(gn.x);
  out.iterations = gn.iterations;
  out.converged = gn.converged;
  out.diverged = gn.diverged;
  out.residual_rms = gn.residual_rms;
  out.condition = gn.condition;
  out.reference_id = sats_est[ref_index].satellite_id;
  out.last_update_norm = gn.last_update_norm;
  return out;
}

EphemerisCorrection ephemeris_error_correction(const OrbitState& sat_est, const Vec3& base_pos, double base_rate,
                                               double ut_rate, const PvState& x_ut, double eps_base, double eps_ut) {
  EphemerisCorrection c;
  c.satellite_id = sat_est.satellite_id;
  const Vec3& xs = sat_est.position;
  const Vec3& vs = sat_est.velocity;
  const double speed = vs.norm();
  if (!(speed > 0.0)) return c;

  const double r_ut_est = (xs - x_ut.position).norm();
  const double rate_ut_est = (vs - x_ut.velocity).dot(unit_los(xs, x_ut.position));
  const double r_b_est = (xs - base_pos).norm();
  const double rate_b_est = vs.dot(unit_los(xs, base_pos));

  const double rate_b = base_rate - eps_base;
  const double den = rate_b * rate_b - speed * speed;
  if (std::abs(den) < kSingularDenominator) return c;

  const double d = (rate_b_est * r_b_est * speed - rate_b * r_b_est * speed) / den;
  c.position_error = d;
  c.base_true_range = r_b_est + d * rate_b / speed;
  c.ut_true_range = r_ut_est + d * (ut_rate - eps_ut) / speed;
  if (!(c.base_true_range > 0.0) || !(c.ut_true_range > 0.0)) return c;
  c.base_rate_error = rate_b_est * (r_b_est / c.base_true_range - 1.0) + speed * d / c.base_true_range;
  c.ut_rate_error = rate_ut_est * (r_ut_est / c.ut_true_range - 1.0) +
                    (vs - x_ut.velocity).norm() * d / c.ut_true_range;
  c.valid = std::isfinite(c.ut_rate_error) && std::isfinite(c.base_rate_error);
  return c;
}

std::vector<EphemerisCorrection> ephemeris_error_correction(std::span<const SatelliteObservation> obs,
                                                            const Vec3& base_pos, const PvState& x_ut) {
  std::vector<EphemerisCorrection> out;
  out.reserve(obs.size());
  for (const auto& o : obs) {
    out.push_back(ephemeris_error_correction(o.sat_est, base_pos, o.base_rate, o.ut_rate, x_ut));
  }
  return out;
}

namespace {

std::vector<OrbitState> states_of(std::span<const SatelliteObservation> obs) {
  std::vector<OrbitState> s;
  s.reserve(obs.size());
  for (const auto& o : obs) s.push_back(o.sat_est);
  return s;
}

Eigen::VectorXd row_weights_for(std::span<const SatelliteObservation> obs, std::size_t ref, const SolverConfig& cfg) {
  if (cfg.weight_mode == WeightMode::identity) return {};
  std::vector<double> sb, su;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (i == ref) continue;
    sb.push_back(obs[i].base_snr);
    su.push_back(obs[i].ut_snr);
  }
  return snr_weight_matrix(sb, su, cfg.weight_floor);
}

void fill_from(EpochSolution& sol, const IterationResult& r, std::size_t n) {
  sol.ok = true;
  sol.estimate = r.estimate;
  sol.iterations = r.iterations;
  sol.converged = r.converged;
  sol.residual_rms = r.residual_rms;
  sol.condition = r.condition;
  sol.reference_id = r.reference_id;
  sol.n_sats = n;
  if (r.diverged) sol.failure = "diverged";
}

template <class Body>
EpochSolution guarded(Method method, UtcTime epoch, Body&& body) {
  EpochSolution sol;
  sol.method = method;
  sol.epoch = epoch;
  try {
    body(sol);
  } catch (const Error& e) {
    sol.ok = false;
    sol.failure = e.what();
  } catch (const std::invalid_argument& e) {
    sol.ok = false;
    sol.failure = e.what();
  }
  return sol;
}

Method method_of(const SolverConfig& cfg) {
  if (!cfg.correction_enabled) return Method::vanilla_dd;
  return cfg.weight_mode == WeightMode::snr ? Method::dd3pose_wls : Method::dd3pose_ls;
}

}  // namespace

EpochSolution solve_3dpose(const MeasurementSet& meas, std::span<const OrbitState> sats_est, const Vec3& base_pos,
                           const SolverConfig& cfg) {
  cfg.validate();
  return guarded(method_of(cfg), meas.epoch, [&](EpochSolution& sol) {
    const std::vector<SatelliteObservation> raw = align_observations(meas, sats_est);
    const PvState x_init{base_pos, Vec3::Zero()};
    const auto prepared = [&](const PvState& ut_guess) {
      std::vector<SatelliteObservation> obs = raw;
      if (cfg.atmosphere_correction) {
        apply_atmosphere_correction(obs, *cfg.atmosphere_correction, base_pos, ut_guess, meas.epoch);
      }
      return obs;
    };

    std::vector<SatelliteObservation> obs = prepared(x_init);
    sol.n_sats = obs.size();
    if (obs.size() < 7) throw InsufficientSatellites(obs.size(), 7);
    std::size_t ref = select_reference(obs, x_init, cfg);
    std::vector<double> sd;
    for (const auto& o : obs) sd.push_back(single_difference_value(o.ut_rate, o.base_rate, o.sat_est, base_pos));
    IterationResult r = iterate_position(states_of(obs), sd, row_weights_for(obs, ref, cfg), ref, x_init, cfg);
    fill_from(sol, r, obs.size());
    if (!cfg.correction_enabled) return;

    for (int pass = 0; pass < cfg.outer_correction_passes; ++pass) {
      const PvState x_hat = r.estimate;
      const std::vector<SatelliteObservation> current = prepared(x_hat);
      const std::vector<EphemerisCorrection> corr = ephemeris_error_correction(current, base_pos, x_hat);

      std::vector<SatelliteObservation> kept;
      std::vector<double> corrected_sd;
      sol.correction_magnitudes.clear();
      for (std::size_t i = 0; i < current.size(); ++i) {
        if (!corr[i].valid) continue;
        const auto& o = current[i];
        kept.push_back(o);
        corrected_sd.push_back(single_difference_value(o.ut_rate, o.base_rate, o.sat_est, base_pos) -
                               (corr[i].ut_rate_error - corr[i].base_rate_error));
        sol.correction_magnitudes.emplace_back(o.sat_est.satellite_id, std::abs(corr[i].position_error));
      }
      if (kept.size() < 7) throw InsufficientSatellites(kept.size(), 7);
      ref = select_reference(kept, x_hat, cfg);
      r = iterate_position(states_of(kept), corrected_sd, row_weights_for(kept, ref, cfg), ref, x_hat, cfg);
      fill_from(sol, r, kept.size());
    }
  });
}

EpochSolution solve_differential(const MeasurementSet& meas, std::span<const OrbitState> sats_est,
                                 const Vec3& base_pos, const SolverConfig& cfg) {
  cfg.validate();
  return guarded(Method::differential, meas.epoch, [&](EpochSolution& sol) {
    std::vector<SatelliteObservation> obs = align_observations(meas, sats_est);
    const PvState x_init{base_pos, Vec3::Zero()};
    if (cfg.atmosphere_correction) {
      apply_atmosphere_correction(obs, *cfg.atmosphere_correction, base_pos, x_init, meas.epoch);
    }
    sol.n_sats = obs.size();
    if (obs.size() < 8) throw InsufficientSatellites(obs.size(), 8);

    // Terminal rate minus the base-side ephemeris error; satellites where the closed form
    // is singular fall back to the plain single difference.
    std::vector<double> sd;
    for (const auto& o : obs) {
      const EphemerisCorrection c = ephemeris_error_correction(o.sat_est, base_pos, o.base_rate, o.ut_rate, x_init);
      sd.push_back(c.valid ? o.ut_rate - c.base_rate_error
                           : single_difference_value(o.ut_rate, o.base_rate, o.sat_est, base_pos));
      if (c.valid) sol.correction_magnitudes.emplace_back(o.sat_est.satellite_id, std::abs(c.position_error));
    }
    const std::vector<OrbitState> sats = states_of(obs);
    const auto n = static_cast<Eigen::Index>(obs.size());

    const auto linearize = [&](const Eigen::VectorXd& x) {
      const PvState pv{x.head<3>(), x.segment<3>(3)};
      const double clock = x[6];
      Linearization lin;
      lin.dz.resize(n);
      lin.g.resize(n, 7);
      for (Eigen::Index i = 0; i < n; ++i) {
        lin.dz[i] = sd[static_cast<std::size_t>(i)] - (predicted_range_rate(sats[static_cast<std::size_t>(i)], pv) + clock);
        lin.g.row(i) << range_rate_partials(sats[static_cast<std::size_t>(i)], pv), 1.0;
      }
      return lin;
    };
    Eigen::VectorXd x0(7);
    x0 << x_init.stacked(), 0.0;
    const GaussNewtonResult gn = gauss_newton(linearize, x0, {}, cfg);

    IterationResult r;
    r.estimate = {gn.x.head<3>(), gn.x.segment<3>(3)};
    r.iterations = gn.iterations;
    r.converged = gn.converged;
    r.diverged = gn.diverged;
    r.residual_rms = gn.residual_rms;
    r.condition = gn.condition;
    fill_from(sol, r, obs.size());
  });
}

EpochSolution solve_epoch(Method method, const MeasurementSet& meas, std::span<const OrbitState> sats_est,
                          const Vec3& base_pos, const SolverConfig& base_cfg) {
  const SolverConfig cfg = config_for(method, base_cfg);
  EpochSolution sol = method == Method::differential ? solve_differential(meas, sats_est, base_pos, cfg)
                                                     : solve_3dpose(meas, sats_est, base_pos, cfg);
  sol.method = method;
  return sol;
}

}  // namespace ddpose
