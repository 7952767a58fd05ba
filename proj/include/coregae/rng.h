#pragma once

#include <cstdint>
#include <random>

namespace coregae {

// Seeded random stream. Distributions are implemented here rather than with
// <random> distribution classes, whose output is library-specific, so a seed
// produces the same stream with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal draw (Box-Muller, caches the second variate).
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent seed for a named stage from a base seed
// (splitmix64 finalizer over base ^ stream tag).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

namespace streams {
inline constexpr std::uint64_t kSplit = 0x51;
inline constexpr std::uint64_t kInit = 0x1a;
inline constexpr std::uint64_t kNoise = 0x2b;
inline constexpr std::uint64_t kPropagation = 0x3c;
inline constexpr std::uint64_t kKMeans = 0x4d;
}  // namespace streams

}  // namespace coregae
