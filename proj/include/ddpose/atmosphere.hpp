#pragma once

#include <array>
#include <functional>

#include "ddpose/frames.hpp"
#include "ddpose/time.hpp"

namespace ddpose {

struct TropoConditions {
  double pressure_hpa = 1013.25;
  double temperature_k = 288.15;
  double water_vapor_hpa = 11.75;
  double zenith_distance_deg = 0.0;  // [0, 90)

  void validate() const;
};

/// Saastamoinen slant delay in meters. Throws std::invalid_argument for z >= 90 deg or
/// non-physical meteorology.
double saastamoinen_delay(const TropoConditions& c);

/// Broadcast Klobuchar coefficient sets. Units follow the navigation message
/// (seconds per semicircle^n).
struct KlobucharCoefficients {
  std::array<double, 4> alpha{};
  std::array<double, 4> beta{};

  /// Frequently used broadcast set (also the RTKLIB fallback).
  static KlobucharCoefficients standard();
};

struct IonoParams {
  KlobucharCoefficients coefficients;
  double geomagnetic_latitude_sc = 0.0;  // semicircles
  double local_time_s = 50400.0;         // [0, 86400)
  double obliquity_factor = 1.0;         // >= 1
};

/// Klobuchar group delay in meters at the L1 reference frequency, with the night floor
/// applied for |x| >= 1.57. Throws ConfigError when the period polynomial is not positive.
double klobuchar_delay(const IonoParams& p);

/// F = 1 + 16 (0.53 - E)^3 with E the elevation in semicircles.
double klobuchar_obliquity(double elevation_deg);

/// Ionospheric pierce point quantities for a receiver/satellite geometry at time t.
IonoParams klobuchar_geometry(const KlobucharCoefficients& coefficients, const GeodeticCoord& receiver,
                              double elevation_deg, double azimuth_deg, UtcTime t);

/// Meteorology plus broadcast coefficients describing one atmosphere realization.
struct AtmosphereModel {
  bool troposphere = true;
  bool ionosphere = true;
  double pressure_hpa = 1013.25;
  double temperature_k = 288.15;
  double water_vapor_hpa = 11.75;
  KlobucharCoefficients klobuchar = KlobucharCoefficients::standard();
  /// Ionospheric delays are scaled by (1575.42 MHz / f)^2 for this carrier frequency.
  double carrier_frequency_hz = 1575.42e6;

  bool enabled() const { return troposphere || ionosphere; }
};

/// Total slant delay (meters) along the path from `sat` to `receiver` at time t.
double slant_delay(const AtmosphereModel& model, const Vec3& sat, const Vec3& receiver, UtcTime t);

inline constexpr double kDefaultDelayRateStep = 0.1;  // s

/// Central difference (f(t + dt) - f(t - dt)) / (2 dt) of a delay history f(seconds offset).
double delay_rate(const std::function<double(double)>& delay, double dt = kDefaultDelayRateStep);

/// Rate of slant_delay for linearly moving endpoints around epoch t.
double slant_delay_rate(const AtmosphereModel& model, const Vec3& sat_pos, const Vec3& sat_vel,
                        const Vec3& rx_pos, const Vec3& rx_vel, UtcTime t,
                        double dt = kDefaultDelayRateStep);

}  // namespace ddpose
