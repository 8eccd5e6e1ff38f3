// Generates the synthetic Starlink-like constellation shipped in data/.
//
// Every satellite is phased so that its ground track crosses a point near the base station
// at a chosen time, which keeps 10+ satellites above the elevation mask throughout the
// scenario window. The first fifteen records carry the published inclination and
// eccentricity of real shells; the rest alternate between the two shells.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>

#include "ddpose/frames.hpp"
#include "ddpose/orbits.hpp"
#include "ddpose/random.hpp"
#include "ddpose/tle.hpp"

namespace {

struct ShellSample {
  const char* name;
  double inclination_deg;
  double eccentricity;
};

constexpr ShellSample kPublished[] = {
    {"STARLINK-1403", 53.0524, 0.0001076}, {"STARLINK-1542", 53.0527, 0.0001466},
    {"STARLINK-1553", 53.0530, 0.0001205}, {"STARLINK-1029", 53.0533, 0.0001596},
    {"STARLINK-1658", 53.0536, 0.0001295}, {"STARLINK-2039", 53.0540, 0.0001461},
    {"STARLINK-1219", 53.0543, 0.0001173}, {"STARLINK-2549", 53.0548, 0.0001459},
    {"STARLINK-3548", 53.2142, 0.0000983}, {"STARLINK-3742", 53.2157, 0.0001568},
    {"STARLINK-3701", 53.2160, 0.0001214}, {"STARLINK-3542", 53.2166, 0.0000961},
    {"STARLINK-3541", 53.2170, 0.0001236}, {"STARLINK-3560", 53.2174, 0.0001512},
    {"STARLINK-3633", 53.2177, 0.0001302},
};

double wrap_deg(double a) {
  a = std::fmod(a, 360.0);
  return a < 0.0 ? a + 360.0 : a;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ddpose;
  CLI::App app{"Synthetic LEO constellation generator"};
  std::string out = "starlink_118.tle", start_text = "2024-05-01T03:00:00Z";
  int count = 118;
  std::uint64_t seed = 11;
  double lat = 37.282268, lon = 127.043524, window_before = 1300.0, window_after = 2300.0, spread_deg = 9.0;
  double check_duration = 600.0, mask = 15.0;
  app.add_option("--out", out, "Output TLE file");
  app.add_option("--start", start_text, "Scenario start epoch (ISO 8601)");
  app.add_option("--count", count, "Number of satellites");
  app.add_option("--seed", seed, "Placement seed");
  app.add_option("--lat", lat, "Target latitude (deg)");
  app.add_option("--lon", lon, "Target longitude (deg)");
  app.add_option("--before", window_before, "Earliest pass time before start (s)");
  app.add_option("--after", window_after, "Latest pass time after start (s)");
  app.add_option("--spread", spread_deg, "Maximum pass-point offset from the target (deg)");
  app.add_option("--check-duration", check_duration, "Window for the visibility report (s)");
  app.add_option("--mask", mask, "Elevation mask for the visibility report (deg)");
  CLI11_PARSE(app, argc, argv);

  const UtcTime start = UtcTime::parse_iso8601(start_text);
  const UtcTime epoch = start.plus_seconds(-86400.0);
  Rng rng(derive_seed({seed, 0x636f6e73ULL}));

  std::vector<TleRecord> records;
  for (int i = 0; i < count; ++i) {
    TleRecord r;
    const bool published = i < static_cast<int>(std::size(kPublished));
    const bool upper_shell = (i % 2) == 1;
    r.name = published ? kPublished[i].name : "STARLINK-" + std::to_string(4000 + i);
    r.inclination_deg =
        published ? kPublished[i].inclination_deg : (upper_shell ? 53.2142 : 53.0524) + uniform(rng, 0.0, 0.004);
    r.eccentricity = published ? kPublished[i].eccentricity : uniform(rng, 0.00009, 0.00016);
    r.catalog_number = 45000 + i;
    char designator[16];
    std::snprintf(designator, sizeof designator, "20%03d%c", 10 + i / 26, static_cast<char>('A' + i % 26));
    r.international_designator = designator;
    r.epoch = epoch;
    r.bstar = 0.0001;
    r.element_set_number = 999;
    r.arg_perigee_deg = uniform(rng, 60.0, 120.0);
    r.revolution_number = 20000 + i;

    const double a = wgs84::kSemiMajorAxis + 550e3;
    const double n_rad_s = std::sqrt(wgs84::kGravitationalParameter / (a * a * a));
    r.mean_motion_rev_per_day = n_rad_s * 86400.0 / (2.0 * kPi);

    // Stratified pass times so coverage is even across the window.
    const double slot = (window_before + window_after) / count;
    const double tau = -window_before + slot * (i + uniform(rng, 0.1, 0.9));
    const double phi = lat + uniform(rng, -spread_deg, spread_deg) * 0.6;
    const double lam = lon + uniform(rng, -spread_deg, spread_deg);
    const bool ascending = uniform01(rng) < 0.5;

    const double inc = deg2rad(r.inclination_deg);
    double u = std::asin(std::clamp(std::sin(deg2rad(phi)) / std::sin(inc), -1.0, 1.0));
    if (!ascending) u = kPi - u;
    const UtcTime pass = start.plus_seconds(tau);
    const double raan = deg2rad(lam) + gmst_rad(pass) - std::atan2(std::cos(inc) * std::sin(u), std::cos(u));
    r.raan_deg = wrap_deg(rad2deg(raan));
    const double m_pass = rad2deg(u) - r.arg_perigee_deg;
    r.mean_anomaly_deg = wrap_deg(m_pass - rad2deg(n_rad_s * pass.seconds_since(epoch)));

    // Round through the printed TLE so the record matches what is read back.
    const auto [l1, l2] = format_tle(r);
    records.push_back(parse_tle(r.name, l1, l2));
  }
  write_tle_file(out, records);

  const KeplerPropagator prop;
  const Vec3 base = geodetic_to_ecef({lat, lon, 0.0});
  std::vector<std::size_t> counts;
  for (double t = 0.0; t <= check_duration; t += 10.0) {
    std::vector<OrbitState> states;
    for (const auto& r : records) states.push_back(prop.propagate(r, start.plus_seconds(t)));
    counts.push_back(visible_satellites(states, base, mask).size());
  }
  const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / static_cast<double>(counts.size());
  std::printf("wrote %zu records to %s; visible above %.1f deg over %.0f s: min %zu mean %.1f max %zu\n",
              records.size(), out.c_str(), mask, check_duration, *mn, mean, *mx);
  return 0;
}
