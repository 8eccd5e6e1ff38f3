#include "ddpose/time.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ddpose {
namespace {

constexpr std::int64_t kNsPerSecond = 1'000'000'000;
constexpr std::int64_t kNsPerDay = 86'400 * kNsPerSecond;
// 2000-01-01T12:00:00Z
constexpr std::int64_t kJ2000UnixNs = 946'728'000LL * kNsPerSecond;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::chrono::year_month_day civil_of(std::int64_t ns) {
  const auto days = floor_div(ns, kNsPerDay);
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days}}};
}

int parse_digits(std::string_view s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) throw std::invalid_argument("timestamp too short");
  int v = 0;
  for (std::size_t i = pos; i < pos + count; ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("non-digit in timestamp");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void expect_char(std::string_view s, std::size_t pos, char c) {
  if (pos >= s.size() || s[pos] != c) {
    throw std::invalid_argument(std::string("expected '") + c + "' in timestamp");
  }
}

}  // namespace

UtcTime UtcTime::from_unix_seconds(double seconds) {
  return UtcTime(static_cast<std::int64_t>(std::llround(seconds * 1e9)));
}

UtcTime UtcTime::from_civil(int year, unsigned month, unsigned day, int hour, int minute,
                            double second) {
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                           std::chrono::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
  const std::int64_t whole = days * kNsPerDay + (hour * 3600LL + minute * 60LL) * kNsPerSecond;
  return UtcTime(whole + static_cast<std::int64_t>(std::llround(second * 1e9)));
}

UtcTime UtcTime::parse_iso8601(std::string_view s) {
  const int y = parse_digits(s, 0, 4);
  expect_char(s, 4, '-');
  const int mo = parse_digits(s, 5, 2);
  expect_char(s, 7, '-');
  const int d = parse_digits(s, 8, 2);
  expect_char(s, 10, 'T');
  const int h = parse_digits(s, 11, 2);
  expect_char(s, 13, ':');
  const int mi = parse_digits(s, 14, 2);
  expect_char(s, 16, ':');
  const int sec = parse_digits(s, 17, 2);
  std::size_t pos = 19;
  std::int64_t frac_ns = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::int64_t scale = 100'000'000;
    std::size_t digits = 0;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      if (digits >= 9) throw std::invalid_argument("more than 9 fractional digits");
      frac_ns += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
      ++digits;
    }
    if (digits == 0) throw std::invalid_argument("empty fraction in timestamp");
  }
  if (pos < s.size() && s[pos] == 'Z') ++pos;
  if (pos != s.size()) throw std::invalid_argument("trailing characters in timestamp");
  if (h > 23 || mi > 59 || sec > 60) throw std::invalid_argument("time of day out of range");
  const UtcTime base = from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h, mi,
                                  static_cast<double>(sec));
  return UtcTime(base.ns_ + frac_ns);
}

double UtcTime::seconds_since(UtcTime other) const {
  return static_cast<double>(ns_ - other.ns_) * 1e-9;
}

UtcTime UtcTime::plus_seconds(double seconds) const {
  return UtcTime(ns_ + static_cast<std::int64_t>(std::llround(seconds * 1e9)));
}

double UtcTime::julian_date() const { return 2451545.0 + days_since_j2000(); }

double UtcTime::days_since_j2000() const {
  const std::int64_t rel = ns_ - kJ2000UnixNs;
  const std::int64_t whole_days = floor_div(rel, kNsPerDay);
  const std::int64_t rem = rel - whole_days * kNsPerDay;
  return static_cast<double>(whole_days) + static_cast<double>(rem) / static_cast<double>(kNsPerDay);
}

double UtcTime::seconds_of_day() const {
  const std::int64_t rem = ns_ - floor_div(ns_, kNsPerDay) * kNsPerDay;
  return static_cast<double>(rem) * 1e-9;
}

int UtcTime::year() const { return static_cast<int>(civil_of(ns_).year()); }

double UtcTime::day_of_year() const {
  using namespace std::chrono;
  const auto jan1 = sys_days{civil_of(ns_).year() / January / 1};
  const std::int64_t jan1_ns = jan1.time_since_epoch().count() * kNsPerDay;
  return 1.0 + static_cast<double>(ns_ - jan1_ns) / static_cast<double>(kNsPerDay);
}

std::string UtcTime::to_iso8601() const {
  const auto ymd = civil_of(ns_);
  const std::int64_t rem = ns_ - floor_div(ns_, kNsPerDay) * kNsPerDay;
  const std::int64_t secs = rem / kNsPerSecond;
  const std::int64_t frac = rem % kNsPerSecond;
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                        static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                        static_cast<int>(secs / 3600), static_cast<int>((secs / 60) % 60),
                        static_cast<int>(secs % 60));
  if (frac % 1'000'000 == 0) {
    n += std::snprintf(buf + n, sizeof buf - n, ".%03lld", static_cast<long long>(frac / 1'000'000));
  } else if (frac % 1'000 == 0) {
    n += std::snprintf(buf + n, sizeof buf - n, ".%06lld", static_cast<long long>(frac / 1'000));
  } else {
    n += std::snprintf(buf + n, sizeof buf - n, ".%09lld", static_cast<long long>(frac));
  }
  std::snprintf(buf + n, sizeof buf - n, "Z");
  return buf;
}

double gmst_rad(UtcTime t) {
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  // The 876600 h term reduces modulo one day to the time elapsed since the last J2000-aligned noon.
  const std::int64_t rel = t.unix_ns() - kJ2000UnixNs;
  const std::int64_t day_ns = rel - floor_div(rel, kNsPerDay) * kNsPerDay;
  const double tut1 = t.days_since_j2000() / 36525.0;
  const double seconds = 67310.54841 + static_cast<double>(day_ns) * 1e-9 + 8640184.812866 * tut1 +
                         0.093104 * tut1 * tut1 - 6.2e-6 * tut1 * tut1 * tut1;
  double angle = std::fmod(seconds, 86400.0) * (kTwoPi / 86400.0);
  if (angle < 0.0) angle += kTwoPi;
  return angle;
}

}  // namespace ddpose
