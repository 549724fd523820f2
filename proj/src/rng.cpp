#include "argsim/rng.hpp"

#include <cmath>

namespace argsim {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t root, std::uint64_t index) noexcept {
  return splitmix64(root + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

std::uint64_t stream_seed(std::uint64_t root, std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(root) ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
}

double Rng::uniform_open() {
  // (k + 0.5) / 2^53 for k in [0, 2^53): never 0, never 1.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::index(std::uint64_t n) {
  auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

double Rng::exponential(double rate) { return -std::log(uniform_open()) / rate; }

}  // namespace argsim
