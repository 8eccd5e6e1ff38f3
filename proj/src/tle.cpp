#include "ddpose/tle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ddpose/errors.hpp"

namespace ddpose {
namespace {

constexpr std::int64_t kNsPerDay = 86'400'000'000'000LL;
constexpr std::int64_t kNsPerDayFraction = 864'000LL;  // 1e-8 day

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string_view rtrim(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\n' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

// Columns are 1-based and inclusive, as printed in the TLE format documentation.
class LineReader {
 public:
  LineReader(std::string_view line, std::size_t line_number)
      : line_(line), line_number_(line_number) {}

  [[noreturn]] void fail(std::size_t column, const std::string& message) const {
    throw ParseError("tle line " + std::to_string(line_number_), line_number_, column, message);
  }

  std::string_view field(std::size_t first, std::size_t last) const {
    return line_.substr(first - 1, last - first + 1);
  }

  double decimal(std::size_t first, std::size_t last, const char* what) const {
    const std::string text(trim(field(first, last)));
    if (text.empty()) fail(first, std::string("empty ") + what);
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(v)) {
      fail(first, std::string("malformed ") + what + " '" + text + "'");
    }
    return v;
  }

  long integer(std::size_t first, std::size_t last, const char* what, bool allow_blank = false) const {
    const std::string text(trim(field(first, last)));
    if (text.empty()) {
      if (allow_blank) return 0;
      fail(first, std::string("empty ") + what);
    }
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size()) fail(first, std::string("malformed ") + what + " '" + text + "'");
    return v;
  }

  // "+12345-4" style: implied leading decimal point and a power-of-ten exponent.
  double assumed_decimal(std::size_t first, std::size_t last, const char* what) const {
    std::string text(trim(field(first, last)));
    if (text.empty()) return 0.0;
    double sign = 1.0;
    if (text[0] == '-' || text[0] == '+') {
      if (text[0] == '-') sign = -1.0;
      text.erase(0, 1);
    }
    const auto exp_pos = text.find_last_of("+-");
    if (exp_pos == std::string::npos || exp_pos == 0 || exp_pos + 1 >= text.size()) {
      fail(first, std::string("malformed ") + what + " '" + text + "'");
    }
    const std::string mantissa = text.substr(0, exp_pos);
    const std::string exponent = text.substr(exp_pos);
    if (!std::all_of(mantissa.begin(), mantissa.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      fail(first, std::string("malformed ") + what + " mantissa");
    }
    char* end = nullptr;
    const long e = std::strtol(exponent.c_str(), &end, 10);
    if (end != exponent.c_str() + exponent.size()) fail(first, std::string("malformed ") + what + " exponent");
    const double m = std::strtod(mantissa.c_str(), nullptr) / std::pow(10.0, static_cast<double>(mantissa.size()));
    return sign * m * std::pow(10.0, static_cast<double>(e));
  }

 private:
  std::string_view line_;
  std::size_t line_number_;
};

void check_line(std::string_view line, char expected_first, std::size_t line_number) {
  LineReader r(line, line_number);
  if (line.size() != 69) {
    r.fail(line.size() < 69 ? line.size() + 1 : 70,
           "line length " + std::to_string(line.size()) + ", expected 69");
  }
  if (line[0] != expected_first) r.fail(1, std::string("expected line number '") + expected_first + "'");
  const char c = line[68];
  if (c < '0' || c > '9') r.fail(69, "checksum is not a digit");
  const int expected = tle_checksum(line);
  if (c - '0' != expected) {
    r.fail(69, "checksum mismatch on line " + std::to_string(line_number) + ": found " +
                   std::string(1, c) + ", computed " + std::to_string(expected));
  }
}

UtcTime epoch_from_fields(int two_digit_year, std::string_view day_text, const LineReader& r) {
  const int year = two_digit_year < 57 ? 2000 + two_digit_year : 1900 + two_digit_year;
  const std::string text(trim(day_text));
  const auto dot = text.find('.');
  const std::string whole = text.substr(0, dot);
  std::string frac = dot == std::string::npos ? std::string() : text.substr(dot + 1);
  if (whole.empty() || frac.size() > 8 ||
      !std::all_of(whole.begin(), whole.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
      !std::all_of(frac.begin(), frac.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    r.fail(21, "malformed epoch day '" + text + "'");
  }
  frac.append(8 - frac.size(), '0');
  const long day = std::strtol(whole.c_str(), nullptr, 10);
  if (day < 1 || day > 366) r.fail(21, "epoch day out of range");
  const long long frac_units = std::strtoll(frac.c_str(), nullptr, 10);
  const UtcTime jan1 = UtcTime::from_civil(year, 1, 1);
  return UtcTime::from_unix_ns(jan1.unix_ns() + (day - 1) * kNsPerDay + frac_units * kNsPerDayFraction);
}

std::string format_assumed_decimal(double v) {
  char buf[32];
  if (v == 0.0) return " 00000+0";
  const char sign = v < 0 ? '-' : ' ';
  const double a = std::abs(v);
  int e = static_cast<int>(std::floor(std::log10(a))) + 1;
  long long digits = std::llround(a / std::pow(10.0, e) * 1e5);
  if (digits >= 100000) {
    digits /= 10;
    ++e;
  }
  if (e < -9 || e > 9) throw std::invalid_argument("TLE exponent field out of range");
  std::snprintf(buf, sizeof buf, "%c%05lld%c%d", sign, digits, e < 0 ? '-' : '+', std::abs(e));
  return buf;
}

std::string format_ndot(double v) {
  if (std::abs(v) >= 1.0) throw std::invalid_argument("mean motion derivative out of TLE range");
  char buf[16];
  std::snprintf(buf, sizeof buf, "%.8f", std::abs(v));
  std::string s(buf + 1);  // drop leading zero
  return (v < 0 ? "-" : " ") + s;
}

}  // namespace

int tle_checksum(std::string_view line) {
  int sum = 0;
  const std::size_t n = std::min<std::size_t>(68, line.size());
  for (std::size_t i = 0; i < n; ++i) {
    const char c = line[i];
    if (c >= '0' && c <= '9') sum += c - '0';
    else if (c == '-') sum += 1;
  }
  return sum % 10;
}

TleRecord parse_tle(std::string_view name_line, std::string_view line1, std::string_view line2) {
  line1 = rtrim(line1);
  line2 = rtrim(line2);
  check_line(line1, '1', 1);
  check_line(line2, '2', 2);
  const LineReader r1(line1, 1);
  const LineReader r2(line2, 2);

  TleRecord t;
  std::string_view name = trim(name_line);
  if (name.size() >= 2 && name[0] == '0' && name[1] == ' ') name = trim(name.substr(2));
  t.name = std::string(name);

  t.catalog_number = static_cast<int>(r1.integer(3, 7, "catalog number"));
  t.classification = line1[7];
  t.international_designator = std::string(trim(r1.field(10, 17)));
  const int yy = static_cast<int>(r1.integer(19, 20, "epoch year"));
  t.epoch = epoch_from_fields(yy, r1.field(21, 32), r1);
  t.mean_motion_dot = r1.decimal(34, 43, "mean motion derivative");
  t.mean_motion_ddot = r1.assumed_decimal(45, 52, "mean motion second derivative");
  t.bstar = r1.assumed_decimal(54, 61, "bstar");
  t.ephemeris_type = static_cast<int>(r1.integer(63, 63, "ephemeris type", true));
  t.element_set_number = static_cast<int>(r1.integer(65, 68, "element set number", true));

  const int catalog2 = static_cast<int>(r2.integer(3, 7, "catalog number"));
  if (catalog2 != t.catalog_number) r2.fail(3, "catalog number differs from line 1");
  t.inclination_deg = r2.decimal(9, 16, "inclination");
  t.raan_deg = r2.decimal(18, 25, "right ascension of ascending node");
  {
    const std::string ecc(trim(r2.field(27, 33)));
    if (ecc.empty() || !std::all_of(ecc.begin(), ecc.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      r2.fail(27, "malformed eccentricity '" + ecc + "'");
    }
    t.eccentricity = static_cast<double>(std::strtol(ecc.c_str(), nullptr, 10)) /
                     std::pow(10.0, static_cast<double>(ecc.size()));
  }
  t.arg_perigee_deg = r2.decimal(35, 42, "argument of perigee");
  t.mean_anomaly_deg = r2.decimal(44, 51, "mean anomaly");
  t.mean_motion_rev_per_day = r2.decimal(53, 63, "mean motion");
  t.revolution_number = static_cast<int>(r2.integer(64, 68, "revolution number", true));

  if (t.inclination_deg < 0.0 || t.inclination_deg > 180.0) r2.fail(9, "inclination outside [0, 180]");
  if (t.eccentricity < 0.0 || t.eccentricity >= 1.0) r2.fail(27, "eccentricity outside [0, 1)");
  if (!(t.mean_motion_rev_per_day > 0.0)) r2.fail(53, "mean motion must be positive");
  return t;
}

std::pair<std::string, std::string> format_tle(const TleRecord& t) {
  const std::int64_t jan1 = UtcTime::from_civil(t.epoch.year(), 1, 1).unix_ns();
  const std::int64_t in_year = t.epoch.unix_ns() - jan1;
  std::int64_t day = in_year / kNsPerDay + 1;
  std::int64_t frac = (in_year % kNsPerDay + kNsPerDayFraction / 2) / kNsPerDayFraction;
  if (frac >= 100'000'000) {
    frac -= 100'000'000;
    ++day;
  }
  char l1[80];
  std::snprintf(l1, sizeof l1, "1 %05d%c %-8s %02d%03lld.%08lld %s %s %s %d %4d", t.catalog_number,
                t.classification, t.international_designator.c_str(), t.epoch.year() % 100,
                static_cast<long long>(day), static_cast<long long>(frac),
                format_ndot(t.mean_motion_dot).c_str(), format_assumed_decimal(t.mean_motion_ddot).c_str(),
                format_assumed_decimal(t.bstar).c_str(), t.ephemeris_type, t.element_set_number);
  char l2[80];
  std::snprintf(l2, sizeof l2, "2 %05d %8.4f %8.4f %07lld %8.4f %8.4f %11.8f%5d", t.catalog_number,
                t.inclination_deg, t.raan_deg, std::llround(t.eccentricity * 1e7), t.arg_perigee_deg,
                t.mean_anomaly_deg, t.mean_motion_rev_per_day, t.revolution_number);
  std::string a(l1), b(l2);
  if (a.size() != 68 || b.size() != 68) throw std::invalid_argument("TLE field overflow while formatting");
  a.push_back(static_cast<char>('0' + tle_checksum(a)));
  b.push_back(static_cast<char>('0' + tle_checksum(b)));
  return {a, b};
}

std::vector<TleRecord> parse_tle_text(std::string_view text, const std::string& source_name) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    ++number;
    const std::string_view line = rtrim(text.substr(pos, end - pos));
    if (!trim(line).empty()) lines.emplace_back(number, std::string(line));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  std::vector<TleRecord> out;
  std::size_t i = 0;
  const auto is_data = [](const std::string& s, char c) { return s.size() >= 2 && s[0] == c && s[1] == ' '; };
  while (i < lines.size()) {
    std::string name;
    std::size_t name_line = lines[i].first;
    if (!is_data(lines[i].second, '1')) {
      name = lines[i].second;
      ++i;
    }
    if (i + 1 >= lines.size()) {
      throw ParseError(source_name, name_line, 0, "incomplete TLE group");
    }
    const auto& [n1, l1] = lines[i];
    const auto& [n2, l2] = lines[i + 1];
    try {
      out.push_back(parse_tle(name, l1, l2));
    } catch (const ParseError& e) {
      const std::size_t file_line = e.line() == 2 ? n2 : n1;
      throw ParseError(source_name, file_line, e.column(), e.what());
    }
    if (out.back().name.empty()) out.back().name = std::to_string(out.back().catalog_number);
    i += 2;
  }
  return out;
}

std::vector<TleRecord> load_tle_file(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      const auto ext = entry.path().extension().string();
      if (entry.is_regular_file() && (ext == ".tle" || ext == ".txt")) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(path)) {
    files.push_back(path);
  } else {
    throw ParseError(path.string(), 0, 0, "TLE source not found");
  }
  std::vector<TleRecord> all;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw ParseError(f.string(), 0, 0, "cannot open TLE file");
    std::ostringstream ss;
    ss << in.rdbuf();
    auto records = parse_tle_text(ss.str(), f.string());
    all.insert(all.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  return all;
}

void write_tle_file(const std::filesystem::path& path, const std::vector<TleRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) {
    const auto [l1, l2] = format_tle(r);
    out << r.name << '\n' << l1 << '\n' << l2 << '\n';
  }
}

}  // namespace ddpose
