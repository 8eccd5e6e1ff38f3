#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ddpose {

/// UTC instant with nanosecond resolution. Leap seconds are not modeled.
class UtcTime {
 public:
  constexpr UtcTime() = default;

  static constexpr UtcTime from_unix_ns(std::int64_t ns) { return UtcTime(ns); }
  static UtcTime from_unix_seconds(double seconds);
  static UtcTime from_civil(int year, unsigned month, unsigned day, int hour = 0, int minute = 0,
                            double second = 0.0);
  /// Accepts `YYYY-MM-DDTHH:MM:SS[.fraction]Z` (the trailing Z is optional).
  static UtcTime parse_iso8601(std::string_view text);

  constexpr std::int64_t unix_ns() const { return ns_; }
  double unix_seconds() const { return static_cast<double>(ns_) * 1e-9; }

  /// this - other, in seconds.
  double seconds_since(UtcTime other) const;
  UtcTime plus_seconds(double seconds) const;

  double julian_date() const;
  /// Days since 2000-01-01T12:00:00 UTC.
  double days_since_j2000() const;
  double seconds_of_day() const;
  int year() const;
  /// 1-based day of year including the fractional day.
  double day_of_year() const;

  std::string to_iso8601() const;

  auto operator<=>(const UtcTime&) const = default;

 private:
  constexpr explicit UtcTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

/// Greenwich mean sidereal angle (IAU-82), radians in [0, 2pi). UT1 is taken as UTC.
double gmst_rad(UtcTime t);

}  // namespace ddpose
