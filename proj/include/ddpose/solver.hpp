#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ddpose/atmosphere.hpp"
#include "ddpose/measurements.hpp"
#include "ddpose/orbits.hpp"

namespace ddpose {

/// Terminal position and velocity in ECEF.
struct PvState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();

  Eigen::Matrix<double, 6, 1> stacked() const;
  PvState operator+(const Eigen::Matrix<double, 6, 1>& delta) const;
};

enum class WeightMode { identity, snr };
enum class ReferenceSelection { highest_elevation, max_snr, fixed_id };

enum class Method { differential, vanilla_dd, dd3pose_ls, dd3pose_wls };

/// Stable command-line names: differential, vanilla_dd, 3dpose_ls, 3dpose_wls.
std::string_view to_string(Method m);
Method method_from_string(std::string_view text);
std::vector<Method> all_methods();

struct SolverConfig {
  double convergence_threshold = 1e-4;  // norm of the stacked (m, m/s) update
  int max_iterations = 50;
  WeightMode weight_mode = WeightMode::identity;
  bool correction_enabled = true;
  int outer_correction_passes = 1;
  ReferenceSelection reference_selection = ReferenceSelection::highest_elevation;
  int fixed_reference_id = 0;
  /// Lower bound applied to SNR weights; 0 keeps the largest SNR difference at weight 0.
  double weight_floor = 0.0;
  double condition_limit = 1e12;
  int divergence_window = 5;
  /// Solver-side atmosphere model subtracted from every measurement before differencing.
  std::optional<AtmosphereModel> atmosphere_correction;

  void validate() const;
};

/// Preset matching a named method (weights, correction stage).
SolverConfig config_for(Method m, SolverConfig base);

/// rho_UT - rho_B + v_sat_est . e_est(base). Throws std::invalid_argument on id/epoch mismatch.
double single_difference(const DopplerMeasurement& ut, const DopplerMeasurement& base, const OrbitState& sat_est,
                         const Vec3& base_pos);

inline double double_difference(double sd_ref, double sd_l) { return sd_ref - sd_l; }

/// (v_sat - v0) . unit(x_sat - x0).
double predicted_range_rate(const OrbitState& sat_est, const PvState& x0);

double predicted_double_difference(const OrbitState& sat_ref_est, const OrbitState& sat_l_est, const PvState& x0);

/// Partials of predicted_range_rate w.r.t. (position, velocity) of the terminal.
Eigen::Matrix<double, 1, 6> range_rate_partials(const OrbitState& sat_est, const PvState& x0);

/// Rows [g_ref - g_l | -e_ref + e_l] for every l != ref_index, in input order.
/// Throws InsufficientSatellites for fewer than 7 satellites.
Eigen::MatrixXd geometry_matrix(std::span<const OrbitState> sats_est, const PvState& x0, std::size_t ref_index);

/// Diagonal of diag((max s - s) / (max s - min s)), s = s_base - s_ut. Identity when max == min.
/// Entries are raised to at least `floor`.
Eigen::VectorXd snr_weight_matrix(std::span<const double> s_base, std::span<const double> s_ut, double floor = 0.0);

/// Ratio of extreme eigenvalues of the symmetric matrix; infinity when not positive definite.
double condition_indicator(const Eigen::MatrixXd& normal);

/// (G^T W G)^-1 G^T W dz with W = diag(weights). Throws GeometryError when the normal
/// matrix condition indicator exceeds `condition_limit`.
Eigen::VectorXd wls_update(const Eigen::MatrixXd& g, const Eigen::VectorXd& weights, const Eigen::VectorXd& dz,
                           double condition_limit = 1e12, double* condition_out = nullptr);
Eigen::VectorXd ls_update(const Eigen::MatrixXd& g, const Eigen::VectorXd& dz, double condition_limit = 1e12);

/// One satellite's data at one epoch after alignment of both receivers.
struct SatelliteObservation {
  OrbitState sat_est;
  double base_rate = 0.0;  // m/s, atmosphere-corrected when a correction model is configured
  double ut_rate = 0.0;
  double base_snr = 0.0;
  double ut_snr = 0.0;
};

/// Aligns the common satellites of a measurement set with estimated states (by id, ascending).
/// Satellites without an estimated state are skipped.
std::vector<SatelliteObservation> align_observations(const MeasurementSet& meas, std::span<const OrbitState> sats_est);

/// Subtracts the modeled slant delay rate: base at `base_pos`, terminal at `ut_guess`.
void apply_atmosphere_correction(std::vector<SatelliteObservation>& obs, const AtmosphereModel& model,
                                 const Vec3& base_pos, const PvState& ut_guess, UtcTime epoch);

std::size_t select_reference(std::span<const SatelliteObservation> obs, const PvState& x0, const SolverConfig& cfg);

struct IterationResult {
  PvState estimate;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
  double residual_rms = 0.0;    // m/s, unweighted post-fit
  double condition = 0.0;       // of the last normal matrix
  int reference_id = 0;
  double last_update_norm = 0.0;
};

/// Gauss-Newton on double differences built from `single_differences` (aligned with `sats_est`).
IterationResult iterate_position(std::span<const OrbitState> sats_est, std::span<const double> single_differences,
                                 const Eigen::VectorXd& row_weights, std::size_t ref_index, const PvState& x_init,
                                 const SolverConfig& cfg);

/// Closed-form ephemeris error estimate for one satellite.
struct EphemerisCorrection {
  int satellite_id = 0;
  bool valid = false;
  double position_error = 0.0;   // signed offset along the estimated velocity, m
  double base_true_range = 0.0;  // r_B, m
  double ut_true_range = 0.0;    // r_UT, m
  double base_rate_error = 0.0;  // m/s
  double ut_rate_error = 0.0;    // m/s
};

inline constexpr double kSingularDenominator = 1e-6;

/// Ephemeris error and its pseudorange-rate effect at the terminal estimate `x_ut`.
/// `eps_base` / `eps_ut` are the residual error rates assumed for the two receivers.
EphemerisCorrection ephemeris_error_correction(const OrbitState& sat_est, const Vec3& base_pos, double base_rate,
                                               double ut_rate, const PvState& x_ut, double eps_base = 0.0,
                                               double eps_ut = 0.0);

std::vector<EphemerisCorrection> ephemeris_error_correction(std::span<const SatelliteObservation> obs,
                                                            const Vec3& base_pos, const PvState& x_ut);

struct EpochSolution {
  UtcTime epoch;
  Method method = Method::vanilla_dd;
  bool ok = false;  // false: epoch is a gap, see `failure`
  std::string failure;
  PvState estimate;
  int iterations = 0;
  bool converged = false;
  double residual_rms = 0.0;
  double condition = 0.0;
  int reference_id = 0;
  std::size_t n_sats = 0;
  std::vector<std::pair<int, double>> correction_magnitudes;  // satellite id, |position error| m
};

struct SolutionReport {
  Method method = Method::vanilla_dd;
  std::vector<EpochSolution> epochs;
};

/// Vanilla double difference followed by ephemeris correction and re-solve. Never throws for
/// per-epoch problems; they are reported through EpochSolution::ok.
EpochSolution solve_3dpose(const MeasurementSet& meas, std::span<const OrbitState> sats_est, const Vec3& base_pos,
                           const SolverConfig& cfg);

/// Single differences with a lumped relative clock-rate unknown (7 unknowns).
EpochSolution solve_differential(const MeasurementSet& meas, std::span<const OrbitState> sats_est,
                                 const Vec3& base_pos, const SolverConfig& cfg);

EpochSolution solve_epoch(Method method, const MeasurementSet& meas, std::span<const OrbitState> sats_est,
                          const Vec3& base_pos, const SolverConfig& base_cfg);

}  // namespace ddpose
