#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ddpose/frames.hpp"
#include "ddpose/time.hpp"
#include "ddpose/tle.hpp"

namespace ddpose {

enum class StateFlavor { truth, estimated };

/// Satellite position and velocity in ECEF at an epoch.
struct OrbitState {
  int satellite_id = 0;
  UtcTime epoch;
  Vec3 position = Vec3::Zero();  // m
  Vec3 velocity = Vec3::Zero();  // m/s
  StateFlavor flavor = StateFlavor::truth;
};

/// Earth-centered inertial state (TEME treated as inertial).
struct InertialState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

RtnBasis rtn_basis(const OrbitState& state);

/// Kepler's third law: semi-major axis in meters for a mean motion in rev/day.
double semi_major_axis_from_mean_motion(double rev_per_day);

/// Solves M = E - e sin E for E (radians).
double solve_kepler(double mean_anomaly_rad, double eccentricity);

class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual OrbitState propagate(const TleRecord& tle, UtcTime t) const = 0;
};

/// Two-body propagation of the element set's osculating Kepler elements, rotated into
/// ECEF with the Greenwich mean sidereal angle.
class KeplerPropagator final : public Propagator {
 public:
  explicit KeplerPropagator(double max_staleness_days = 7.0);

  OrbitState propagate(const TleRecord& tle, UtcTime t) const override;
  InertialState propagate_inertial(const TleRecord& tle, UtcTime t) const;
  /// Mean anomaly at t in degrees, [0, 360).
  double mean_anomaly_at(const TleRecord& tle, UtcTime t) const;

  double max_staleness_days() const { return max_staleness_days_; }

 private:
  void check_staleness(const TleRecord& tle, UtcTime t) const;
  double max_staleness_days_;
};

Vec3 eci_to_ecef_position(const Vec3& r_eci, UtcTime t);
Vec3 eci_to_ecef_velocity(const Vec3& r_eci, const Vec3& v_eci, UtcTime t);

struct MagnitudeRange {
  double min = 0.0;
  double max = 0.0;

  static MagnitudeRange fixed(double v) { return {v, v}; }
};

/// Ephemeris error magnitudes resolved along the true state's RTN triad.
struct EphemerisErrorSpec {
  MagnitudeRange position_tangential;  // m
  MagnitudeRange position_radial;      // m
  MagnitudeRange velocity_radial;      // m/s
  MagnitudeRange velocity_tangential;  // m/s
  bool randomize_sign = true;
  double per_satellite_jitter = 0.0;   // fraction in [0, 0.5]

  void validate() const;
  bool is_zero() const;
};

/// Per-satellite signed offsets drawn from a spec. Order of draws is fixed.
struct EphemerisOffsets {
  double position_tangential = 0.0;
  double position_radial = 0.0;
  double velocity_radial = 0.0;
  double velocity_tangential = 0.0;
};

EphemerisOffsets draw_ephemeris_offsets(const EphemerisErrorSpec& spec, std::uint64_t seed, int satellite_id);

/// Returns the estimated-flavor state: truth plus spec offsets along rtn_basis(truth).
OrbitState inject_ephemeris_error(const OrbitState& truth, const EphemerisErrorSpec& spec, std::uint64_t seed);
OrbitState apply_ephemeris_offsets(const OrbitState& truth, const EphemerisOffsets& offsets);

/// States whose elevation at `receiver` exceeds `mask_deg`, in input order.
std::vector<OrbitState> visible_satellites(std::span<const OrbitState> states, const Vec3& receiver, double mask_deg);

}  // namespace ddpose
