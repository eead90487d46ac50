#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace stochq {

using Rng = std::mt19937_64;

/// Independent random streams split off a run's master seed. Toggling the
/// agent variant never shifts the environment stream and vice versa.
enum class SeedStream : std::uint64_t {
  env = 1,
  agent = 2,
  sampler = 3,
  memory = 4,
  network = 5,
};

/// Counter-based derivation (splitmix64 finalizer over master and stream id).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) noexcept;

inline std::uint64_t derive_seed(std::uint64_t master, SeedStream stream) noexcept {
  return derive_seed(master, static_cast<std::uint64_t>(stream));
}

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Uniform real in [0, 1).
inline double uniform_unit(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace stochq
