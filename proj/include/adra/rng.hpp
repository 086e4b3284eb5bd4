#pragma once

#include <cstdint>
#include <random>

namespace adra {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for replication r: mix64(mix64(seed) ^ r). Streams for different
// replications are independent of how replications are scheduled.
constexpr std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t replication) noexcept {
  return mix64(mix64(seed) ^ replication);
}

// mt19937_64 with a portable [0, 1) conversion (top 53 bits), so draws are
// bit-identical across standard libraries.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed) : engine_(seed) {}

  double next() noexcept { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace adra
