#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace ddpose {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Order-sensitive combination of seed components (scenario seed, epoch index, ids, stream tag).
constexpr std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (const auto p : parts) h = mix64(h ^ mix64(p));
  return h;
}

/// Stream tags keep independent random draws from colliding.
enum class SeedStream : std::uint64_t {
  ephemeris = 1,
  receiver_clock = 2,
  satellite_clock = 3,
  measurement_noise = 4,
  snr_jitter = 5,
  clock_draw = 6,
};

constexpr std::uint64_t tag(SeedStream s) { return static_cast<std::uint64_t>(s); }

using Rng = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits; platform independent unlike std distributions.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

/// Box-Muller; consumes two draws per call.
inline double standard_normal(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace ddpose
