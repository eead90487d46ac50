#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace stochq {

/// Per-step observables emitted by every training loop.
struct MetricsRecord {
  std::uint64_t step = 0;
  std::uint64_t episode = 0;
  double reward = 0.0;
  double cumulative_reward = 0.0;
  double epsilon = 0.0;
  /// max over A minus stoch_max over C at the acting state; absent only
  /// when exact-max tracking is switched off.
  std::optional<double> beta;
  /// stoch_max / max; absent when max <= 0.
  std::optional<double> omega;
  /// Absent when timing is disabled for byte-reproducible output.
  std::optional<std::uint64_t> wall_time_ns;
  std::size_t candidates = 0;

  // Instrumented spans (not part of the curve file).
  std::uint64_t selection_ns = 0;
  std::uint64_t update_ns = 0;
  std::uint64_t env_ns = 0;
};

}  // namespace stochq
