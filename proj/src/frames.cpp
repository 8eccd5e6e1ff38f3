#include "ddpose/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>

#include "ddpose/errors.hpp"

namespace ddpose {

double EnuVector::norm() const { return std::sqrt(east * east + north * north + up * up); }

Vec3 geodetic_to_ecef(const GeodeticCoord& g) {
  if (!(g.latitude_deg >= -90.0 && g.latitude_deg <= 90.0)) {
    throw std::invalid_argument("latitude out of range: " + std::to_string(g.latitude_deg));
  }
  if (!std::isfinite(g.longitude_deg) || !std::isfinite(g.height_m)) {
    throw std::invalid_argument("non-finite geodetic coordinate");
  }
  const double lat = deg2rad(g.latitude_deg);
  const double lon = deg2rad(g.longitude_deg);
  const double s = std::sin(lat);
  const double c = std::cos(lat);
  const double n = wgs84::kSemiMajorAxis / std::sqrt(1.0 - wgs84::kEccentricitySq * s * s);
  return {(n + g.height_m) * c * std::cos(lon), (n + g.height_m) * c * std::sin(lon),
          (n * (1.0 - wgs84::kEccentricitySq) + g.height_m) * s};
}

GeodeticCoord ecef_to_geodetic(const Vec3& p) {
  if (!p.allFinite() || p.norm() < 1000.0) {
    throw GeometryError("ecef_to_geodetic: point within 1 km of the Earth's center");
  }
  constexpr double a = wgs84::kSemiMajorAxis;
  constexpr double e2 = wgs84::kEccentricitySq;
  const double rho = std::hypot(p.x(), p.y());
  double lat = std::atan2(p.z(), rho * (1.0 - e2));
  double h = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double s = std::sin(lat);
    const double n = a / std::sqrt(1.0 - e2 * s * s);
    h = rho * std::cos(lat) + p.z() * s - a * a / n;
    const double next = std::atan2(p.z(), rho * (1.0 - e2 * n / (n + h)));
    const bool done = std::abs(next - lat) < 1e-12;
    lat = next;
    if (done) break;
  }
  const double s = std::sin(lat);
  const double n = a / std::sqrt(1.0 - e2 * s * s);
  h = rho * std::cos(lat) + p.z() * s - a * a / n;
  double lon = rad2deg(std::atan2(p.y(), p.x()));
  if (lon <= -180.0) lon += 360.0;
  return {rad2deg(lat), lon, h};
}

Eigen::Matrix3d ecef_to_enu_rotation(const GeodeticCoord& reference) {
  const double lat = deg2rad(reference.latitude_deg);
  const double lon = deg2rad(reference.longitude_deg);
  const double sl = std::sin(lat), cl = std::cos(lat);
  const double so = std::sin(lon), co = std::cos(lon);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

EnuVector rotate_to_enu(const Vec3& delta, const GeodeticCoord& reference) {
  const Vec3 v = ecef_to_enu_rotation(reference) * delta;
  return {v.x(), v.y(), v.z()};
}

EnuVector ecef_to_enu(const Vec3& target, const GeodeticCoord& reference) {
  return rotate_to_enu(target - geodetic_to_ecef(reference), reference);
}

Vec3 enu_to_ecef_delta(const EnuVector& enu, const GeodeticCoord& reference) {
  return ecef_to_enu_rotation(reference).transpose() * Vec3(enu.east, enu.north, enu.up);
}

Vec3 local_up(const Vec3& receiver) {
  return ecef_to_enu_rotation(ecef_to_geodetic(receiver)).row(2).transpose();
}

double elevation_angle(const Vec3& sat, const Vec3& receiver) {
  const Vec3 los = sat - receiver;
  const double range = los.norm();
  if (!(range > 0.0)) throw GeometryError("elevation_angle: satellite and receiver coincide");
  const double sine = std::clamp(los.dot(local_up(receiver)) / range, -1.0, 1.0);
  return rad2deg(std::asin(sine));
}

double azimuth_angle(const Vec3& sat, const Vec3& receiver) {
  const Vec3 los = sat - receiver;
  if (!(los.norm() > 0.0)) throw GeometryError("azimuth_angle: satellite and receiver coincide");
  const Vec3 enu = ecef_to_enu_rotation(ecef_to_geodetic(receiver)) * los;
  double az = rad2deg(std::atan2(enu.x(), enu.y()));
  if (az < 0.0) az += 360.0;
  return az;
}

RtnBasis rtn_basis(const Vec3& position, const Vec3& velocity) {
  const double rn = position.norm();
  const double vn = velocity.norm();
  const Vec3 h = position.cross(velocity);
  if (!(rn > 0.0) || !(vn > 0.0) || h.norm() <= 1e-12 * rn * vn) {
    throw GeometryError("rtn_basis: position and velocity are zero or parallel");
  }
  RtnBasis b;
  b.radial = position / rn;
  b.cross_track = h.normalized();
  b.along_track = b.cross_track.cross(b.radial);
  return b;
}

}  // namespace ddpose
