#pragma once

#include <array>
#include <cstdint>

#include "balance_forge/distributions.hpp"

namespace balance_forge {

/// SplitMix64: seeding and stream derivation.
struct SplitMix64 {
  std::uint64_t state = 0;

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

/// xoshiro256++ with inverse-CDF normal sampling. Every variate is a pure
/// function of the stream state, so replications are reproducible bit for bit
/// on a given build regardless of how they are scheduled across threads.
class Xoshiro256pp {
 public:
  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm{seed};
    for (auto& word : state_) word = sm.next();
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
      state_[0] = 0x9E3779B97F4A7C15ULL;
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1p-53;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  double normal() { return normal_quantile(uniform01()); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  SplitMix64 sm{h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2))};
  return sm.next();
}

}  // namespace detail

/// Independent substream addressed by up to three coordinates (for example
/// grid index and replication index under a run seed).
inline Xoshiro256pp substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
  return Xoshiro256pp(detail::mix64(detail::mix64(detail::mix64(seed, a), b), c));
}

}  // namespace balance_forge
