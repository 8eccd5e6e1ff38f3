#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ddpose/atmosphere.hpp"
#include "ddpose/orbits.hpp"

namespace ddpose {

inline constexpr double kDefaultCarrierFrequencyHz = 11.325e9;

enum class ReceiverId { base = 0, ut = 1 };

std::string_view to_string(ReceiverId id);
ReceiverId receiver_from_string(std::string_view text);

/// Clock polynomial a0 + a1 (t - t0) + a2 (t - t0)^2 / 2 with a white drift disturbance.
struct ClockModel {
  double bias_s = 0.0;
  double drift = 0.0;            // s/s
  double frequency_drift = 0.0;  // s/s^2
  UtcTime reference_time;
  double drift_noise_std = 0.0;  // s/s

  bool operator==(const ClockModel&) const = default;
};

/// c (a1 + a2 (t - t0) + psi_dot), with psi_dot ~ N(0, drift_noise_std^2) drawn from `seed`.
double clock_rate_term(const ClockModel& clock, UtcTime t, std::uint64_t seed);

double doppler_to_range_rate(double doppler_hz, double wavelength_m);
double range_rate_to_doppler(double range_rate_mps, double wavelength_m);
double wavelength_for(double carrier_frequency_hz);

/// One pseudorange-rate observation. The Doppler shift is the stored quantity and the
/// pseudorange rate is derived from it, so rate + doppler * wavelength == 0 holds exactly.
class DopplerMeasurement {
 public:
  DopplerMeasurement() = default;

  static DopplerMeasurement from_doppler(int satellite_id, UtcTime epoch, ReceiverId receiver, double doppler_hz,
                                         double wavelength_m, double snr_db);
  static DopplerMeasurement from_range_rate(int satellite_id, UtcTime epoch, ReceiverId receiver,
                                            double range_rate_mps, double wavelength_m, double snr_db);

  int satellite_id() const { return satellite_id_; }
  UtcTime epoch() const { return epoch_; }
  ReceiverId receiver() const { return receiver_; }
  double doppler_shift() const { return doppler_hz_; }
  double carrier_wavelength() const { return wavelength_m_; }
  double pseudorange_rate() const { return range_rate_; }
  double snr() const { return snr_db_; }

  /// Copy whose pseudorange rate is shifted by `delta` (m/s), Doppler kept consistent.
  DopplerMeasurement shifted(double delta_mps) const;

  bool operator==(const DopplerMeasurement&) const = default;

 private:
  int satellite_id_ = 0;
  UtcTime epoch_;
  ReceiverId receiver_ = ReceiverId::base;
  double doppler_hz_ = 0.0;
  double wavelength_m_ = 1.0;
  double range_rate_ = 0.0;
  double snr_db_ = 0.0;
};

struct MeasurementSet {
  UtcTime epoch;
  std::vector<DopplerMeasurement> base;
  std::vector<DopplerMeasurement> ut;
  std::vector<int> common_satellite_ids;  // ascending

  /// Recomputes common ids; throws std::invalid_argument on duplicate ids per receiver.
  void update_common();
  const DopplerMeasurement* find(ReceiverId receiver, int satellite_id) const;
};

/// (v_sat - v_rx) . (x_sat - x_rx) / |x_sat - x_rx|; positive when the range grows.
double geometric_range_rate(const OrbitState& sat, const Vec3& rx_pos, const Vec3& rx_vel);
double geometric_range_rate(const Vec3& sat_pos, const Vec3& sat_vel, const Vec3& rx_pos, const Vec3& rx_vel);

struct SnrModel {
  double low_elevation_deg = 15.0;
  double low_snr_db = 5.0;
  double high_elevation_deg = 90.0;
  double high_snr_db = 15.0;
  double jitter_db = 1.0;  // uniform in [-jitter, +jitter]

  double mean(double elevation_deg) const;
};

/// Elevation-driven SNR: linear between the two anchors (held flat outside them) plus
/// uniform jitter drawn from `seed`.
double snr_model(double elevation_deg, std::uint64_t seed, const SnrModel& model = {});

struct NoiseModel {
  double std_hz = 0.1;
  /// Scales the standard deviation by 10^(-(snr - 10) / 20) when set.
  bool snr_scaling = false;

  double effective_std_hz(double snr_db) const;
};

/// Per-epoch draw addresses: every random term is a pure function of these ids.
struct SynthesisSeeds {
  std::uint64_t scenario_seed = 0;
  std::uint64_t epoch_index = 0;
};

struct ReceiverSample {
  ReceiverId id = ReceiverId::base;
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  ClockModel clock;
};

/// Error model inputs shared by every measurement of a scenario.
struct SynthesisModel {
  std::optional<AtmosphereModel> atmosphere;  // truth atmosphere; nullopt disables delays
  NoiseModel noise;
  SnrModel snr;
  double carrier_frequency_hz = kDefaultCarrierFrequencyHz;
};

/// pseudorange rate = geometric + clock(rx) - clock(sat) + atmospheric rate + noise.
/// Throws GeometryError when the satellite is not above the receiver's horizon.
DopplerMeasurement synthesize_measurement(const OrbitState& sat_true, const ReceiverSample& rx,
                                          const ClockModel& sat_clock, const SynthesisModel& model,
                                          const SynthesisSeeds& seeds);

/// Measurements for every satellite above `mask_deg` at each receiver. `sat_clocks` is
/// aligned with `sats_true`.
MeasurementSet build_measurement_set(std::span<const OrbitState> sats_true, std::span<const ClockModel> sat_clocks,
                                     const ReceiverSample& base, const ReceiverSample& ut,
                                     const SynthesisModel& model, double mask_deg, UtcTime epoch,
                                     const SynthesisSeeds& seeds);

/// Range bounds for drawing per-satellite or per-receiver clock polynomials.
struct ClockRanges {
  double drift_max = 1e-8;            // |a1| bound, s/s
  double frequency_drift_max = 1e-12;  // |a2| bound, s/s^2
  double drift_noise_std = 0.0;

  bool operator==(const ClockRanges&) const = default;
};

/// Draws a1, a2 uniformly within the bounds; the draw depends on (seed, stream, id) only.
ClockModel draw_clock(const ClockRanges& ranges, UtcTime reference, std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t id);

}  // namespace ddpose
