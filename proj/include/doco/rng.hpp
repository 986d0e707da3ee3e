#pragma once

// Counter-based random numbers.
//
// Every random quantity in a simulation is addressed by a key
// (seed, stream, trial, a, b, c): for example a delay is keyed by
// (seed, Stream::delay, trial, round, agent, 0). The value is a pure function of
// the key, computed by chaining the SplitMix64 finalizer over the key words, so
// draws never depend on iteration order or on how many other draws were made.
// This is what keeps schedules and loss streams identical across algorithms,
// thread counts, and reruns.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace doco {

enum class Stream : std::uint64_t {
  delay = 1,
  feature = 2,
  noise = 3,
  sign = 4,
  test = 99,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, Stream stream, std::uint64_t trial = 0)
      : base_(splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL)) ^
              splitmix64(trial + 0x632BE59BD9B4E019ULL)) {}

  constexpr std::uint64_t bits(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t h = splitmix64(base_ ^ a);
    h = splitmix64(h ^ (b * 0x9E3779B97F4A7C15ULL));
    h = splitmix64(h ^ (c * 0xC2B2AE3D27D4EB4FULL));
    return h;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return static_cast<double>(bits(a, b, c) >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_open_closed(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return 1.0 - uniform(a, b, c);
  }

  double uniform(double lo, double hi, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return lo + (hi - lo) * uniform(a, b, c);
  }

  // Uniform integer on {0, ..., max}. Multiply-shift; bias is below 2^-40
  // for the ranges used here.
  std::uint64_t uniform_int(std::uint64_t max, std::uint64_t a, std::uint64_t b = 0,
                            std::uint64_t c = 0) const {
    const unsigned __int128 wide = static_cast<unsigned __int128>(bits(a, b, c)) * (max + 1);
    return static_cast<std::uint64_t>(wide >> 64);
  }

  // Standard normal via Box-Muller on two sub-counters of the key.
  double normal(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    const double u1 = uniform_open_closed(a, b, 2 * c);
    const double u2 = uniform(a, b, 2 * c + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Failures before the first success, P(k) = p (1 - p)^k, by inversion.
  std::uint64_t geometric(double p, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    if (p >= 1.0) return 0;
    const double u = uniform_open_closed(a, b, c);
    const double k = std::floor(std::log(u) / std::log1p(-p));
    return k >= 1e18 ? static_cast<std::uint64_t>(1e18) : static_cast<std::uint64_t>(k);
  }

  // +1 or -1 with equal probability.
  int rademacher(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    return (bits(a, b, c) >> 63) ? 1 : -1;
  }

 private:
  std::uint64_t base_;
};

}  // namespace doco
