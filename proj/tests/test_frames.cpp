#include <doctest.h>

#include <cmath>

#include "ddpose/errors.hpp"
#include "ddpose/frames.hpp"
#include "ddpose/random.hpp"
#include "ddpose/time.hpp"

using namespace ddpose;

TEST_CASE("geodetic_to_ecef reference points") {
  const Vec3 eq = geodetic_to_ecef({0.0, 0.0, 0.0});
  CHECK(eq.x() == doctest::Approx(6378137.0).epsilon(1e-15));
  CHECK(std::abs(eq.y()) < 1e-9);
  CHECK(std::abs(eq.z()) < 1e-9);

  const Vec3 pole = geodetic_to_ecef({90.0, 0.0, 0.0});
  CHECK(std::abs(pole.x()) < 1e-6);
  CHECK(pole.z() == doctest::Approx(6356752.3142).epsilon(1e-10));

  // Closed-form ellipsoid evaluation (independent script), base receiver at 50 m.
  const Vec3 suwon = geodetic_to_ecef({37.282268, 127.043524, 50.0});
  CHECK(suwon.x() == doctest::Approx(-3060975.313126).epsilon(1e-12));
  CHECK(suwon.y() == doctest::Approx(4055637.829832).epsilon(1e-12));
  CHECK(suwon.z() == doctest::Approx(3842395.110640).epsilon(1e-12));
}

TEST_CASE("ecef_to_geodetic inverts reference points") {
  const GeodeticCoord eq = ecef_to_geodetic({6378137.0, 0.0, 0.0});
  CHECK(std::abs(eq.latitude_deg) < 1e-12);
  CHECK(std::abs(eq.longitude_deg) < 1e-12);
  CHECK(std::abs(eq.height_m) < 1e-6);

  const GeodeticCoord pole = ecef_to_geodetic({0.0, 0.0, 6356752.3142});
  CHECK(pole.latitude_deg == doctest::Approx(90.0));
  CHECK(std::abs(pole.height_m) < 1e-3);

  CHECK_THROWS_AS(ecef_to_geodetic({10.0, 0.0, 0.0}), GeometryError);
}

TEST_CASE("geodetic round trip over random points") {
  Rng rng(derive_seed({42}));
  for (int i = 0; i < 200; ++i) {
    const GeodeticCoord g{uniform(rng, -89.0, 89.0), uniform(rng, -179.0, 179.0), uniform(rng, -100.0, 600e3)};
    const GeodeticCoord back = ecef_to_geodetic(geodetic_to_ecef(g));
    CHECK(back.latitude_deg == doctest::Approx(g.latitude_deg).epsilon(1e-11));
    CHECK(back.longitude_deg == doctest::Approx(g.longitude_deg).epsilon(1e-11));
    CHECK(std::abs(back.height_m - g.height_m) < 1e-4);
  }
}

TEST_CASE("ecef_to_enu local frame") {
  const GeodeticCoord ref{37.282268, 127.043524, 40.0};
  const Vec3 origin = geodetic_to_ecef(ref);
  const EnuVector zero = ecef_to_enu(origin, ref);
  CHECK(std::abs(zero.east) < 1e-9);
  CHECK(std::abs(zero.north) < 1e-9);
  CHECK(std::abs(zero.up) < 1e-9);

  const EnuVector up = ecef_to_enu(geodetic_to_ecef({ref.latitude_deg, ref.longitude_deg, 140.0}), ref);
  CHECK(std::abs(up.east) < 1e-6);
  CHECK(std::abs(up.north) < 1e-6);
  CHECK(up.up == doctest::Approx(100.0).epsilon(1e-9));

  // Small displacement due north of an equatorial reference.
  const GeodeticCoord eq{0.0, 10.0, 0.0};
  const EnuVector north = ecef_to_enu(geodetic_to_ecef({1e-4, 10.0, 0.0}), eq);
  CHECK(north.north > 10.0);
  CHECK(std::abs(north.east) < 1e-6);

  const EnuVector v{12.0, -3.0, 4.5};
  const EnuVector back = rotate_to_enu(enu_to_ecef_delta(v, ref), ref);
  CHECK(back.east == doctest::Approx(v.east));
  CHECK(back.north == doctest::Approx(v.north));
  CHECK(back.up == doctest::Approx(v.up));
  CHECK(v.norm() == doctest::Approx(std::sqrt(144.0 + 9.0 + 20.25)));
}

TEST_CASE("elevation angle") {
  const GeodeticCoord ref{37.0, 127.0, 0.0};
  const Vec3 rx = geodetic_to_ecef(ref);
  CHECK(elevation_angle(rx + 550e3 * local_up(rx), rx) == doctest::Approx(90.0));
  const Vec3 east = enu_to_ecef_delta({1000e3, 0.0, 0.0}, ref);
  CHECK(std::abs(elevation_angle(rx + east, rx)) < 1e-9);
  CHECK(azimuth_angle(rx + east, rx) == doctest::Approx(90.0));

  const Vec3 origin = geodetic_to_ecef({0.0, 0.0, 0.0});
  CHECK(elevation_angle(Vec3(6378137.0 + 550e3, 0.0, 0.0), origin) == doctest::Approx(90.0));

  // Dot-product oracle for satellites displaced along an equatorial orbit.
  for (double deg : {2.0, 5.0, 9.0, 14.0}) {
    const double a = 6378137.0 + 550e3;
    const Vec3 sat(a * std::cos(deg2rad(deg)), a * std::sin(deg2rad(deg)), 0.0);
    const Vec3 los = sat - origin;
    const double oracle = rad2deg(std::asin(los.dot(Vec3::UnitX()) / los.norm()));
    CHECK(elevation_angle(sat, origin) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("rtn basis") {
  const RtnBasis b = rtn_basis(Vec3(7e6, 0, 0), Vec3(0, 7500, 0));
  CHECK((b.radial - Vec3::UnitX()).norm() < 1e-15);
  CHECK((b.along_track - Vec3::UnitY()).norm() < 1e-15);
  CHECK((b.cross_track - Vec3::UnitZ()).norm() < 1e-15);

  Rng rng(derive_seed({7}));
  for (int i = 0; i < 100; ++i) {
    const Vec3 r(uniform(rng, -7e6, 7e6), uniform(rng, -7e6, 7e6), uniform(rng, -7e6, 7e6));
    const Vec3 v(uniform(rng, -7e3, 7e3), uniform(rng, -7e3, 7e3), uniform(rng, -7e3, 7e3));
    const RtnBasis t = rtn_basis(r, v);
    CHECK(std::abs(t.radial.norm() - 1.0) < 1e-12);
    CHECK(std::abs(t.along_track.norm() - 1.0) < 1e-12);
    CHECK(std::abs(t.cross_track.norm() - 1.0) < 1e-12);
    CHECK(std::abs(t.radial.dot(t.along_track)) < 1e-12);
    CHECK(std::abs(t.radial.dot(t.cross_track)) < 1e-12);
    CHECK(std::abs(t.along_track.dot(t.cross_track)) < 1e-12);
    CHECK((t.radial.cross(t.along_track) - t.cross_track).norm() < 1e-9);
  }
  CHECK_THROWS(rtn_basis(Vec3(7e6, 0, 0), Vec3(1.0, 0, 0)));
}

TEST_CASE("utc time parsing and arithmetic") {
  const UtcTime t = UtcTime::parse_iso8601("2024-05-01T03:00:00Z");
  CHECK(t == UtcTime::from_civil(2024, 5, 1, 3, 0, 0.0));
  CHECK(t.to_iso8601() == "2024-05-01T03:00:00.000Z");
  CHECK(UtcTime::parse_iso8601(t.plus_seconds(1.25).to_iso8601()) == t.plus_seconds(1.25));
  CHECK(t.plus_seconds(86400.0).seconds_since(t) == 86400.0);
  CHECK(t.day_of_year() == doctest::Approx(122.125));
  CHECK(UtcTime::from_civil(2000, 1, 1, 12).days_since_j2000() == 0.0);
  CHECK(UtcTime::from_civil(2000, 1, 1, 12).julian_date() == doctest::Approx(2451545.0));
  CHECK_THROWS(UtcTime::parse_iso8601("2024-13-01T00:00:00Z"));
  CHECK_THROWS(UtcTime::parse_iso8601("yesterday"));

  // GMST at J2000 noon: 280.46061837 degrees.
  CHECK(rad2deg(gmst_rad(UtcTime::from_civil(2000, 1, 1, 12))) == doctest::Approx(280.46061837).epsilon(1e-9));
}
