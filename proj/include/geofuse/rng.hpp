#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace geofuse {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent seed for stream (a, b) of a base seed. Used for
/// per-particle/per-iteration and per-epoch substreams so results do not
/// depend on evaluation order.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t a,
                             std::uint64_t b = 0) noexcept;

/// Seeded generator. Real-valued draws are computed from raw engine output
/// here rather than through <random> distributions, whose algorithms differ
/// between standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  static Rng substream(std::uint64_t seed, std::uint64_t a,
                       std::uint64_t b = 0) {
    return Rng(substream_seed(seed, a, b));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace geofuse
