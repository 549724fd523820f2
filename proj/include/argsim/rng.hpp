#pragma once

#include <cstdint>
#include <random>

namespace argsim {

/// splitmix64 output function. Used to derive child seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for replicate `index` of a run rooted at `root`.
///
/// child = splitmix64(root + (index + 1) * 0x9E3779B97F4A7C15). Replicates
/// are independent of the order in which they are generated.
std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) noexcept;

/// Root seed for an independent stream (e.g. one engine of a comparison).
std::uint64_t stream_seed(std::uint64_t root, std::uint64_t stream) noexcept;

/// Seedable 64-bit generator (mt19937_64) with portable conversions.
///
/// Doubles are built from the top 53 bits directly, so draws do not depend
/// on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open();

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t index(std::uint64_t n);

  /// Exponential with the given rate, by inversion.
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
};

}  // namespace argsim
