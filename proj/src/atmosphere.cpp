#include "ddpose/atmosphere.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ddpose/errors.hpp"

namespace ddpose {

void TropoConditions::validate() const {
  if (!(pressure_hpa > 0.0)) throw std::invalid_argument("pressure must be positive");
  if (!(temperature_k > 0.0)) throw std::invalid_argument("temperature must be positive");
  if (!(water_vapor_hpa >= 0.0)) throw std::invalid_argument("water vapor pressure must be non-negative");
  if (!(zenith_distance_deg >= 0.0 && zenith_distance_deg < 90.0)) {
    throw std::invalid_argument("zenith distance must lie in [0, 90) degrees");
  }
}

double saastamoinen_delay(const TropoConditions& c) {
  c.validate();
  const double z = deg2rad(c.zenith_distance_deg);
  const double tan_z = std::tan(z);
  return 0.002277 / std::cos(z) *
         (c.pressure_hpa + (1255.0 / c.temperature_k + 0.05) * c.water_vapor_hpa - 1.16 * tan_z * tan_z);
}

KlobucharCoefficients KlobucharCoefficients::standard() {
  return {{0.1118e-07, -0.7451e-08, -0.5961e-07, 0.1192e-06},
          {0.1167e+06, -0.2294e+06, -0.1311e+06, 0.1049e+07}};
}

double klobuchar_delay(const IonoParams& p) {
  if (!(p.obliquity_factor >= 1.0)) throw ConfigError("obliquity_factor", "must be at least 1");
  if (!(p.local_time_s >= 0.0 && p.local_time_s < 86400.0)) {
    throw ConfigError("local_time", "must lie in [0, 86400) seconds");
  }
  const double phi = p.geomagnetic_latitude_sc;
  double amplitude = 0.0, period = 0.0, power = 1.0;
  for (int n = 0; n < 4; ++n) {
    amplitude += p.coefficients.alpha[n] * power;
    period += p.coefficients.beta[n] * power;
    power *= phi;
  }
  if (!(period > 0.0)) throw ConfigError("klobuchar.beta", "period polynomial must be positive");
  amplitude = std::max(amplitude, 0.0);

  const double x = 2.0 * kPi * (p.local_time_s - 50400.0) / period;
  double seconds = 5e-9;
  if (std::abs(x) < 1.57) {
    const double x2 = x * x;
    seconds += amplitude * (1.0 - x2 / 2.0 + x2 * x2 / 24.0);
  }
  return kSpeedOfLight * p.obliquity_factor * seconds;
}

double klobuchar_obliquity(double elevation_deg) {
  const double e = elevation_deg / 180.0;
  const double k = 0.53 - e;
  return 1.0 + 16.0 * k * k * k;
}

IonoParams klobuchar_geometry(const KlobucharCoefficients& coefficients, const GeodeticCoord& receiver,
                              double elevation_deg, double azimuth_deg, UtcTime t) {
  const double e = elevation_deg / 180.0;
  const double az = deg2rad(azimuth_deg);
  const double psi = 0.0137 / (e + 0.11) - 0.022;
  const double phi_i = std::clamp(receiver.latitude_deg / 180.0 + psi * std::cos(az), -0.416, 0.416);
  const double lambda_i = receiver.longitude_deg / 180.0 + psi * std::sin(az) / std::cos(phi_i * kPi);

  IonoParams p;
  p.coefficients = coefficients;
  p.geomagnetic_latitude_sc = phi_i + 0.064 * std::cos((lambda_i - 1.617) * kPi);
  double local = std::fmod(43200.0 * lambda_i + t.seconds_of_day(), 86400.0);
  if (local < 0.0) local += 86400.0;
  p.local_time_s = local;
  p.obliquity_factor = klobuchar_obliquity(elevation_deg);
  return p;
}

double slant_delay(const AtmosphereModel& model, const Vec3& sat, const Vec3& receiver, UtcTime t) {
  if (!model.enabled()) return 0.0;
  const double elevation = elevation_angle(sat, receiver);
  if (elevation <= 0.0) throw GeometryError("slant_delay: satellite below the horizon");
  double total = 0.0;
  if (model.troposphere) {
    total += saastamoinen_delay({model.pressure_hpa, model.temperature_k, model.water_vapor_hpa, 90.0 - elevation});
  }
  if (model.ionosphere) {
    const GeodeticCoord geo = ecef_to_geodetic(receiver);
    const IonoParams p = klobuchar_geometry(model.klobuchar, geo, elevation, azimuth_angle(sat, receiver), t);
    const double ratio = 1575.42e6 / model.carrier_frequency_hz;
    total += klobuchar_delay(p) * ratio * ratio;
  }
  return total;
}

double delay_rate(const std::function<double(double)>& delay, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("delay_rate step must be positive");
  return (delay(dt) - delay(-dt)) / (2.0 * dt);
}

double slant_delay_rate(const AtmosphereModel& model, const Vec3& sat_pos, const Vec3& sat_vel,
                        const Vec3& rx_pos, const Vec3& rx_vel, UtcTime t, double dt) {
  if (!model.enabled()) return 0.0;
  return delay_rate(
      [&](double h) {
        return slant_delay(model, sat_pos + h * sat_vel, rx_pos + h * rx_vel, t.plus_seconds(h));
      },
      dt);
}

}  // namespace ddpose
