#include "ddpose/measurements.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <stdexcept>
#include <string>

#include "ddpose/errors.hpp"
#include "ddpose/random.hpp"

namespace ddpose {

std::string_view to_string(ReceiverId id) { return id == ReceiverId::base ? "base" : "ut"; }

ReceiverId receiver_from_string(std::string_view text) {
  if (text == "base") return ReceiverId::base;
  if (text == "ut") return ReceiverId::ut;
  throw std::invalid_argument("unknown receiver id '" + std::string(text) + "'");
}

double clock_rate_term(const ClockModel& clock, UtcTime t, std::uint64_t seed) {
  double rate = clock.drift + clock.frequency_drift * t.seconds_since(clock.reference_time);
  if (clock.drift_noise_std > 0.0) {
    Rng rng(seed);
    rate += clock.drift_noise_std * standard_normal(rng);
  }
  return kSpeedOfLight * rate;
}

double doppler_to_range_rate(double doppler_hz, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw std::invalid_argument("wavelength must be positive");
  return -doppler_hz * wavelength_m;
}

double range_rate_to_doppler(double range_rate_mps, double wavelength_m) {
  if (!(wavelength_m > 0.0)) throw std::invalid_argument("wavelength must be positive");
  return -range_rate_mps / wavelength_m;
}

double wavelength_for(double carrier_frequency_hz) {
  if (!(carrier_frequency_hz > 0.0)) throw std::invalid_argument("carrier frequency must be positive");
  return kSpeedOfLight / carrier_frequency_hz;
}

DopplerMeasurement DopplerMeasurement::from_doppler(int satellite_id, UtcTime epoch, ReceiverId receiver,
                                                    double doppler_hz, double wavelength_m, double snr_db) {
  DopplerMeasurement m;
  m.satellite_id_ = satellite_id;
  m.epoch_ = epoch;
  m.receiver_ = receiver;
  m.doppler_hz_ = doppler_hz;
  m.wavelength_m_ = wavelength_m;
  m.range_rate_ = doppler_to_range_rate(doppler_hz, wavelength_m);
  m.snr_db_ = snr_db;
  return m;
}

DopplerMeasurement DopplerMeasurement::from_range_rate(int satellite_id, UtcTime epoch, ReceiverId receiver,
                                                       double range_rate_mps, double wavelength_m,
                                                       double snr_db) {
  return from_doppler(satellite_id, epoch, receiver, range_rate_to_doppler(range_rate_mps, wavelength_m),
                      wavelength_m, snr_db);
}

DopplerMeasurement DopplerMeasurement::shifted(double delta_mps) const {
  return from_range_rate(satellite_id_, epoch_, receiver_, range_rate_ + delta_mps, wavelength_m_, snr_db_);
}

void MeasurementSet::update_common() {
  const auto ids_of = [](const std::vector<DopplerMeasurement>& list, const char* who) {
    std::vector<int> ids;
    ids.reserve(list.size());
    for (const auto& m : list) ids.push_back(m.satellite_id());
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
      throw std::invalid_argument(std::string("duplicate satellite id in ") + who + " measurements");
    }
    return ids;
  };
  const auto b = ids_of(base, "base");
  const auto u = ids_of(ut, "ut");
  common_satellite_ids.clear();
  std::set_intersection(b.begin(), b.end(), u.begin(), u.end(), std::back_inserter(common_satellite_ids));
}

const DopplerMeasurement* MeasurementSet::find(ReceiverId receiver, int satellite_id) const {
  const auto& list = receiver == ReceiverId::base ? base : ut;
  for (const auto& m : list) {
    if (m.satellite_id() == satellite_id) return &m;
  }
  return nullptr;
}

double geometric_range_rate(const Vec3& sat_pos, const Vec3& sat_vel, const Vec3& rx_pos, const Vec3& rx_vel) {
  const Vec3 los = sat_pos - rx_pos;
  const double range = los.norm();
  if (!(range > 0.0)) throw GeometryError("geometric_range_rate: satellite and receiver coincide");
  return (sat_vel - rx_vel).dot(los) / range;
}

double geometric_range_rate(const OrbitState& sat, const Vec3& rx_pos, const Vec3& rx_vel) {
  return geometric_range_rate(sat.position, sat.velocity, rx_pos, rx_vel);
}

double SnrModel::mean(double elevation_deg) const {
  const double span = high_elevation_deg - low_elevation_deg;
  const double x = std::clamp((elevation_deg - low_elevation_deg) / span, 0.0, 1.0);
  return low_snr_db + x * (high_snr_db - low_snr_db);
}

double snr_model(double elevation_deg, std::uint64_t seed, const SnrModel& model) {
  double snr = model.mean(elevation_deg);
  if (model.jitter_db > 0.0) {
    Rng rng(seed);
    snr += uniform(rng, -model.jitter_db, model.jitter_db);
  }
  return snr;
}

double NoiseModel::effective_std_hz(double snr_db) const {
  return snr_scaling ? std_hz * std::pow(10.0, -(snr_db - 10.0) / 20.0) : std_hz;
}

DopplerMeasurement synthesize_measurement(const OrbitState& sat_true, const ReceiverSample& rx,
                                          const ClockModel& sat_clock, const SynthesisModel& model,
                                          const SynthesisSeeds& seeds) {
  const double elevation = elevation_angle(sat_true.position, rx.position);
  if (elevation <= 0.0) {
    throw GeometryError("satellite " + std::to_string(sat_true.satellite_id) + " is below the horizon of the " +
                        std::string(to_string(rx.id)) + " receiver");
  }
  const auto sat_id = static_cast<std::uint64_t>(sat_true.satellite_id);
  const auto rx_id = static_cast<std::uint64_t>(rx.id);
  const std::uint64_t s = seeds.scenario_seed, k = seeds.epoch_index;
  const UtcTime t = sat_true.epoch;

  const double wavelength = wavelength_for(model.carrier_frequency_hz);
  // Error terms are accumulated apart from the geometric rate and added to it once.
  double perturbation = clock_rate_term(rx.clock, t, derive_seed({s, tag(SeedStream::receiver_clock), k, rx_id})) -
                        clock_rate_term(sat_clock, t, derive_seed({s, tag(SeedStream::satellite_clock), k, sat_id}));
  if (model.atmosphere && model.atmosphere->enabled()) {
    perturbation += slant_delay_rate(*model.atmosphere, sat_true.position, sat_true.velocity, rx.position, rx.velocity, t);
  }

  const double snr = snr_model(elevation, derive_seed({s, tag(SeedStream::snr_jitter), k, sat_id, rx_id}), model.snr);
  const double sigma_hz = model.noise.effective_std_hz(snr);
  if (sigma_hz > 0.0) {
    Rng rng(derive_seed({s, tag(SeedStream::measurement_noise), k, sat_id, rx_id}));
    perturbation += sigma_hz * wavelength * standard_normal(rng);
  }
  const double rate = geometric_range_rate(sat_true, rx.position, rx.velocity) + perturbation;
  return DopplerMeasurement::from_range_rate(sat_true.satellite_id, t, rx.id, rate, wavelength, snr);
}

MeasurementSet build_measurement_set(std::span<const OrbitState> sats_true, std::span<const ClockModel> sat_clocks,
                                     const ReceiverSample& base, const ReceiverSample& ut,
                                     const SynthesisModel& model, double mask_deg, UtcTime epoch,
                                     const SynthesisSeeds& seeds) {
  if (sat_clocks.size() != sats_true.size()) {
    throw std::invalid_argument("build_measurement_set: one clock model per satellite required");
  }
  MeasurementSet set;
  set.epoch = epoch;
  for (std::size_t i = 0; i < sats_true.size(); ++i) {
    const OrbitState& sat = sats_true[i];
    if (elevation_angle(sat.position, base.position) > mask_deg) {
      set.base.push_back(synthesize_measurement(sat, base, sat_clocks[i], model, seeds));
    }
    if (elevation_angle(sat.position, ut.position) > mask_deg) {
      set.ut.push_back(synthesize_measurement(sat, ut, sat_clocks[i], model, seeds));
    }
  }
  set.update_common();
  return set;
}

ClockModel draw_clock(const ClockRanges& ranges, UtcTime reference, std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t id) {
  if (!(ranges.drift_max >= 0.0) || !(ranges.frequency_drift_max >= 0.0) || !(ranges.drift_noise_std >= 0.0)) {
    throw ConfigError("clock", "ranges must be non-negative");
  }
  Rng rng(derive_seed({seed, tag(SeedStream::clock_draw), stream, id}));
  ClockModel c;
  c.reference_time = reference;
  c.drift = uniform(rng, -ranges.drift_max, ranges.drift_max);
  c.frequency_drift = uniform(rng, -ranges.frequency_drift_max, ranges.frequency_drift_max);
  c.drift_noise_std = ranges.drift_noise_std;
  return c;
}

}  // namespace ddpose
