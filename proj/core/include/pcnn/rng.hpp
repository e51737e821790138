// SPDX-License-Identifier: MIT
//
// Project-wide pseudo-random number generation.
//
// Every stochastic operation in the library takes an explicit 64-bit seed and
// derives independent streams from it, so a (seed, stream) pair fully
// determines the byte-exact output. The generator is xoshiro256** seeded
// through SplitMix64, following the construction recommended by its authors.

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace pcnn {

/// SplitMix64: seed expander / mixing function.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

/// Combine a user seed with a stream index into a new 64-bit seed.
/// Stream 0 of seed s is distinct from seed s itself.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 sm(seed ^ (0xD1B54A32D192ED03ULL + stream * 0x9E3779B97F4A7C15ULL));
  std::uint64_t x = sm.next();
  return x ^ sm.next();
}

/// xoshiro256**: the library's only generator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  /// Construct stream `stream` of seed `seed`.
  explicit Xoshiro256(std::uint64_t seed, std::uint64_t stream = 0) {
    SplitMix64 sm(derive_seed(seed, stream));
    for (auto& s : state_) s = sm.next();
  }

  std::uint64_t operator()() { return next(); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double strictly inside (0, 1): 53 random bits plus a half-ulp
  /// offset, so inverse-CDF transforms never see 0 or 1.
  double next_unit() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() {
    return std::numeric_limits<std::uint64_t>::max();
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace pcnn
