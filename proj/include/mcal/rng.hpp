#pragma once

#include <cstdint>

namespace mcal {

// SplitMix64 (Steele/Lea/Vigna). State advances by a fixed odd constant and
// the output is a bijective mix of the state, so draw k is a pure function of
// (seed, stream, k) and fixtures replay bit-for-bit across platforms.
//
// Substreams start from a hashed (seed, stream) state; different stream ids
// give phase offsets that are astronomically unlikely to overlap within a run.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(mix(seed) ^ mix(stream + 0x517CC1B727220A95ULL)) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform double in [0, 1), 53 random mantissa bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [0, hi).
  double next_double(double hi) { return next_double() * hi; }

  // Uniform integer in [0, n), n >= 1. Fixed-point multiply (Lemire); the
  // bias is at most n / 2^64 and the result is deterministic.
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

// Fixed substream ids so the components of one run never share a generator.
namespace rng_stream {
inline constexpr std::uint64_t kPrediction = 1;  // sampling p_t from w_t
inline constexpr std::uint64_t kContexts = 2;    // stream context draws
inline constexpr std::uint64_t kLabels = 3;      // stream label draws
inline constexpr std::uint64_t kLearner = 4;     // learner-internal sampling
inline constexpr std::uint64_t kNoise = 5;       // GFTPL perturbation noise
}  // namespace rng_stream

}  // namespace mcal
