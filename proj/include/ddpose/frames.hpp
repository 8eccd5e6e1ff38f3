#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace ddpose {

/// ECEF vector: meters for positions, m/s for velocities.
using Vec3 = Eigen::Vector3d;

namespace wgs84 {
inline constexpr double kSemiMajorAxis = 6378137.0;
inline constexpr double kFlattening = 1.0 / 298.257223563;
inline constexpr double kEccentricitySq = kFlattening * (2.0 - kFlattening);
inline constexpr double kSemiMinorAxis = kSemiMajorAxis * (1.0 - kFlattening);
inline constexpr double kEarthRotationRate = 7.2921151467e-5;  // rad/s
inline constexpr double kGravitationalParameter = 3.986004418e14;  // m^3/s^2
}  // namespace wgs84

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct GeodeticCoord {
  double latitude_deg = 0.0;   // [-90, 90]
  double longitude_deg = 0.0;  // (-180, 180]
  double height_m = 0.0;       // above the WGS-84 ellipsoid
};

/// Local tangent-plane vector. Error reports list components as (north, east, up).
struct EnuVector {
  double east = 0.0;
  double north = 0.0;
  double up = 0.0;

  double norm() const;
};

struct RtnBasis {
  Vec3 radial;
  Vec3 along_track;
  Vec3 cross_track;
};

Vec3 geodetic_to_ecef(const GeodeticCoord& g);

/// Iterative latitude solve (1e-12 rad). Rejects points within 1 km of the Earth's center.
GeodeticCoord ecef_to_geodetic(const Vec3& p);

/// Rows are the east, north and up unit vectors at `reference`.
Eigen::Matrix3d ecef_to_enu_rotation(const GeodeticCoord& reference);

EnuVector ecef_to_enu(const Vec3& target, const GeodeticCoord& reference);
EnuVector rotate_to_enu(const Vec3& delta, const GeodeticCoord& reference);
Vec3 enu_to_ecef_delta(const EnuVector& enu, const GeodeticCoord& reference);

/// Geodetic local-up unit vector at an ECEF point.
Vec3 local_up(const Vec3& receiver);

/// Elevation of `sat` above the receiver's local horizontal plane, degrees in [-90, 90].
double elevation_angle(const Vec3& sat, const Vec3& receiver);
/// Azimuth clockwise from north, degrees in [0, 360).
double azimuth_angle(const Vec3& sat, const Vec3& receiver);

/// Radial / along-track / cross-track triad of an orbit state.
RtnBasis rtn_basis(const Vec3& position, const Vec3& velocity);

}  // namespace ddpose
