#pragma once

#include <cstdint>
#include <random>

namespace esrk {

/// Seeded random stream with platform-independent draws.
///
/// The standard distributions are implementation-defined, so integer and real
/// draws are built directly on the 64-bit Mersenne Twister output, which is
/// fully specified by the standard.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [lo, hi] by rejection sampling.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
    if (span == 0) return static_cast<std::int64_t>(next()); // full range
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + static_cast<std::int64_t>(x % span);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in the open interval (lo, hi).
  double uniform_open(double lo, double hi) {
    double u = 0.0;
    while (u == 0.0) u = uniform01();
    return lo + (hi - lo) * u;
  }

private:
  std::mt19937_64 engine_;
};

/// Derive an independent child seed (splitmix64 finalizer over seed and index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

} // namespace esrk
