#include "ddpose/orbits.hpp"

#include <cmath>
#include <string>

#include "ddpose/errors.hpp"
#include "ddpose/random.hpp"

namespace ddpose {

RtnBasis rtn_basis(const OrbitState& state) { return rtn_basis(state.position, state.velocity); }

double semi_major_axis_from_mean_motion(double rev_per_day) {
  if (!(rev_per_day > 0.0)) throw std::invalid_argument("mean motion must be positive");
  const double n = rev_per_day * 2.0 * kPi / 86400.0;
  return std::cbrt(wgs84::kGravitationalParameter / (n * n));
}

double solve_kepler(double mean_anomaly_rad, double eccentricity) {
  if (eccentricity < 0.0 || eccentricity >= 1.0) {
    throw PropagationError("solve_kepler: eccentricity " + std::to_string(eccentricity) +
                           " is not elliptic");
  }
  const double m = std::remainder(mean_anomaly_rad, 2.0 * kPi);
  double e_anom = eccentricity < 0.8 ? m : kPi;
  for (int i = 0; i < 50; ++i) {
    const double f = e_anom - eccentricity * std::sin(e_anom) - m;
    const double step = f / (1.0 - eccentricity * std::cos(e_anom));
    e_anom -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return e_anom;
}

Vec3 eci_to_ecef_position(const Vec3& r_eci, UtcTime t) {
  const double theta = gmst_rad(t);
  const double c = std::cos(theta), s = std::sin(theta);
  return {c * r_eci.x() + s * r_eci.y(), -s * r_eci.x() + c * r_eci.y(), r_eci.z()};
}

Vec3 eci_to_ecef_velocity(const Vec3& r_eci, const Vec3& v_eci, UtcTime t) {
  const Vec3 r = eci_to_ecef_position(r_eci, t);
  const Vec3 v = eci_to_ecef_position(v_eci, t);
  const Vec3 omega(0.0, 0.0, wgs84::kEarthRotationRate);
  return v - omega.cross(r);
}

KeplerPropagator::KeplerPropagator(double max_staleness_days) : max_staleness_days_(max_staleness_days) {
  if (!(max_staleness_days > 0.0)) throw std::invalid_argument("staleness bound must be positive");
}

void KeplerPropagator::check_staleness(const TleRecord& tle, UtcTime t) const {
  const double age_days = std::abs(t.seconds_since(tle.epoch)) / 86400.0;
  if (age_days >= max_staleness_days_) {
    throw PropagationError("element set " + std::to_string(tle.catalog_number) + " is " +
                           std::to_string(age_days) + " days from its epoch (bound " +
                           std::to_string(max_staleness_days_) + ")");
  }
  if (tle.eccentricity < 0.0 || tle.eccentricity >= 1.0) {
    throw PropagationError("element set " + std::to_string(tle.catalog_number) + " is not elliptic");
  }
}

double KeplerPropagator::mean_anomaly_at(const TleRecord& tle, UtcTime t) const {
  check_staleness(tle, t);
  const double revs = tle.mean_motion_rev_per_day * t.seconds_since(tle.epoch) / 86400.0;
  double m = std::fmod(tle.mean_anomaly_deg + 360.0 * (revs - std::floor(revs)), 360.0);
  if (m < 0.0) m += 360.0;
  return m;
}

InertialState KeplerPropagator::propagate_inertial(const TleRecord& tle, UtcTime t) const {
  check_staleness(tle, t);
  const double mu = wgs84::kGravitationalParameter;
  const double a = semi_major_axis_from_mean_motion(tle.mean_motion_rev_per_day);
  const double e = tle.eccentricity;
  const double ecc_anom = solve_kepler(deg2rad(mean_anomaly_at(tle, t)), e);

  const double cos_e = std::cos(ecc_anom), sin_e = std::sin(ecc_anom);
  const double root = std::sqrt(1.0 - e * e);
  const double r = a * (1.0 - e * cos_e);
  const double p_pos = a * (cos_e - e);
  const double q_pos = a * root * sin_e;
  const double k = std::sqrt(mu * a) / r;
  const double p_vel = -k * sin_e;
  const double q_vel = k * root * cos_e;

  const double raan = deg2rad(tle.raan_deg);
  const double inc = deg2rad(tle.inclination_deg);
  const double argp = deg2rad(tle.arg_perigee_deg);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(inc), si = std::sin(inc);
  const double cw = std::cos(argp), sw = std::sin(argp);
  // Columns of R3(-raan) R1(-inc) R3(-argp): perifocal P and Q axes in ECI.
  const Vec3 p_axis(co * cw - so * sw * ci, so * cw + co * sw * ci, sw * si);
  const Vec3 q_axis(-co * sw - so * cw * ci, -so * sw + co * cw * ci, cw * si);

  InertialState s;
  s.position = p_pos * p_axis + q_pos * q_axis;
  s.velocity = p_vel * p_axis + q_vel * q_axis;
  return s;
}

OrbitState KeplerPropagator::propagate(const TleRecord& tle, UtcTime t) const {
  const InertialState eci = propagate_inertial(tle, t);
  OrbitState out;
  out.satellite_id = tle.catalog_number;
  out.epoch = t;
  out.position = eci_to_ecef_position(eci.position, t);
  out.velocity = eci_to_ecef_velocity(eci.position, eci.velocity, t);
  out.flavor = StateFlavor::truth;
  return out;
}

void EphemerisErrorSpec::validate() const {
  const auto check = [](const MagnitudeRange& r, const char* field) {
    if (!(r.min >= 0.0) || !(r.max >= r.min)) {
      throw ConfigError(std::string("ephemeris_error.") + field, "magnitudes must satisfy 0 <= min <= max");
    }
  };
  check(position_tangential, "position_tangential");
  check(position_radial, "position_radial");
  check(velocity_radial, "velocity_radial");
  check(velocity_tangential, "velocity_tangential");
  if (!(per_satellite_jitter >= 0.0 && per_satellite_jitter <= 0.5)) {
    throw ConfigError("ephemeris_error.per_satellite_jitter", "must lie in [0, 0.5]");
  }
}

bool EphemerisErrorSpec::is_zero() const {
  return position_tangential.max == 0.0 && position_radial.max == 0.0 && velocity_radial.max == 0.0 &&
         velocity_tangential.max == 0.0;
}

EphemerisOffsets draw_ephemeris_offsets(const EphemerisErrorSpec& spec, std::uint64_t seed, int satellite_id) {
  spec.validate();
  Rng rng(derive_seed({seed, tag(SeedStream::ephemeris), static_cast<std::uint64_t>(satellite_id)}));
  // Every component consumes the same number of draws so that changing one magnitude
  // does not reshuffle the others.
  const auto draw = [&](const MagnitudeRange& r) {
    const double magnitude = uniform(rng, r.min, r.max);
    const double jitter = 1.0 + uniform(rng, -spec.per_satellite_jitter, spec.per_satellite_jitter);
    const bool flip = uniform01(rng) < 0.5;
    const double sign = (spec.randomize_sign && flip) ? -1.0 : 1.0;
    const double m = r.min == r.max ? r.min : magnitude;
    return sign * m * (spec.per_satellite_jitter > 0.0 ? jitter : 1.0);
  };
  EphemerisOffsets o;
  o.position_tangential = draw(spec.position_tangential);
  o.position_radial = draw(spec.position_radial);
  o.velocity_radial = draw(spec.velocity_radial);
  o.velocity_tangential = draw(spec.velocity_tangential);
  return o;
}

OrbitState apply_ephemeris_offsets(const OrbitState& truth, const EphemerisOffsets& o) {
  OrbitState est = truth;
  est.flavor = StateFlavor::estimated;
  if (o.position_tangential == 0.0 && o.position_radial == 0.0 && o.velocity_radial == 0.0 &&
      o.velocity_tangential == 0.0) {
    return est;
  }
  const RtnBasis b = rtn_basis(truth);
  est.position = truth.position + o.position_tangential * b.along_track + o.position_radial * b.radial;
  est.velocity = truth.velocity + o.velocity_radial * b.radial + o.velocity_tangential * b.along_track;
  return est;
}

OrbitState inject_ephemeris_error(const OrbitState& truth, const EphemerisErrorSpec& spec, std::uint64_t seed) {
  if (truth.flavor != StateFlavor::truth) {
    throw std::invalid_argument("inject_ephemeris_error expects a true state");
  }
  return apply_ephemeris_offsets(truth, draw_ephemeris_offsets(spec, seed, truth.satellite_id));
}

std::vector<OrbitState> visible_satellites(std::span<const OrbitState> states, const Vec3& receiver,
                                           double mask_deg) {
  if (!(mask_deg >= 0.0 && mask_deg < 90.0)) throw std::invalid_argument("elevation mask outside [0, 90)");
  std::vector<OrbitState> out;
  for (const auto& s : states) {
    if (elevation_angle(s.position, receiver) > mask_deg) out.push_back(s);
  }
  return out;
}

}  // namespace ddpose
