#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ddpose/time.hpp"

namespace ddpose {

/// One two-line element set. Angles in degrees, mean motion in rev/day.
struct TleRecord {
  std::string name;
  int catalog_number = 0;
  char classification = 'U';
  std::string international_designator;  // columns 10-17 of line 1, trimmed
  UtcTime epoch;
  double mean_motion_dot = 0.0;     // rev/day^2 (already halved, as printed)
  double mean_motion_ddot = 0.0;    // rev/day^3 (already divided by six)
  double bstar = 0.0;               // 1/earth radii
  int ephemeris_type = 0;
  int element_set_number = 0;
  double inclination_deg = 0.0;
  double raan_deg = 0.0;
  double eccentricity = 0.0;
  double arg_perigee_deg = 0.0;
  double mean_anomaly_deg = 0.0;
  double mean_motion_rev_per_day = 0.0;
  int revolution_number = 0;

  bool operator==(const TleRecord&) const = default;
};

/// Mod-10 checksum over the first 68 columns: digits count their value, '-' counts one.
int tle_checksum(std::string_view line);

/// Decodes a TLE entry using the standard column layout. Throws ParseError naming the
/// offending line (1 or 2) and column.
TleRecord parse_tle(std::string_view name_line, std::string_view line1, std::string_view line2);

/// Formats a record back into its two data lines with valid checksums.
std::pair<std::string, std::string> format_tle(const TleRecord& record);

/// Loads 3-line groups from a file, or from every *.tle / *.txt file in a directory
/// (sorted by filename).
std::vector<TleRecord> load_tle_file(const std::filesystem::path& path);
std::vector<TleRecord> parse_tle_text(std::string_view text, const std::string& source_name);

void write_tle_file(const std::filesystem::path& path, const std::vector<TleRecord>& records);

}  // namespace ddpose
