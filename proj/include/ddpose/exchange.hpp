#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ddpose/measurements.hpp"

namespace ddpose {

/// Reference trajectory sample carried alongside measurements for offline evaluation.
struct TruthSample {
  UtcTime epoch;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
};

/// Contents of a base-to-terminal measurement exchange file.
///
/// Layout (comma separated, numbers printed with 17 significant digits):
///
///     # ddpose-exchange 1
///     # base_ecef_m,<x>,<y>,<z>
///     # carrier_frequency_hz,<f>
///     epoch,receiver_id,satellite_id,doppler_shift_hz,snr_db
///     <record lines>
///     truth,<epoch>,<x>,<y>,<z>,<vx>,<vy>,<vz>      (optional)
///     # end,<record count>
///
/// The trailer makes truncated files detectable.
struct ExchangeFile {
  Vec3 base_position = Vec3::Zero();
  double carrier_frequency_hz = kDefaultCarrierFrequencyHz;
  std::vector<MeasurementSet> epochs;  // ordered by epoch
  std::vector<TruthSample> truth;

  std::size_t record_count() const;
};

std::string format_exchange(const ExchangeFile& file);
ExchangeFile parse_exchange(std::string_view text, const std::string& source_name);

ExchangeFile read_exchange_file(const std::filesystem::path& path);
void write_exchange_file(const std::filesystem::path& path, const ExchangeFile& file);

/// %.17g text: exact round trip through parse, well above 12 significant digits.
std::string format_double(double value);

}  // namespace ddpose
