#pragma once

// Training loops that turn a RunConfig into curve files and summaries.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "stochq/config.hpp"
#include "stochq/deep.hpp"
#include "stochq/envs.hpp"
#include "stochq/metrics.hpp"
#include "stochq/tabular.hpp"

namespace stochq {

/// Builds the configured discrete environment; `seed` drives its dynamics.
/// Generated MDP tables come from env.mdp_seed. Throws invalid_config.
std::unique_ptr<DiscreteEnvironment> make_discrete_env(const EnvConfig& env, std::uint64_t seed);
std::unique_ptr<ContinuousEnvironment> make_continuous_env(const EnvConfig& env, std::uint64_t seed);

/// Drives one tabular agent through one environment step by step. Sarsa
/// selects its next action during the update and executes it next step.
class TabularTrainer {
 public:
  TabularTrainer(DiscreteEnvironment& env, TabularAgent& agent, bool record_timing = true);

  MetricsRecord step();

  std::uint64_t steps() const noexcept { return step_; }
  std::uint64_t episodes() const noexcept { return episode_; }

 private:
  DiscreteEnvironment* env_;
  TabularAgent* agent_;
  bool record_timing_;
  bool active_ = false;
  std::size_t state_ = 0;
  std::optional<Selection> pending_;
  double pending_epsilon_ = 0.0;
  std::uint64_t step_ = 0;
  std::uint64_t episode_ = 0;
  double cumulative_reward_ = 0.0;
};

/// Mean undiscounted return of the exact greedy policy over `episodes`
/// episodes, each cut off after `max_steps` steps.
double greedy_return(DiscreteEnvironment& env, const TabularAgent& agent, std::size_t episodes,
                     std::size_t max_steps = 1000);

struct SeedSummary {
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;
  std::uint64_t episodes = 0;
  double final_cumulative_reward = 0.0;
  /// Mean reward over the last `window` steps.
  double mean_window_reward = 0.0;
  std::size_t window = 0;
  /// Mean of wall_time_ns; absent when timing is off.
  std::optional<double> mean_step_ns;
  /// Mean omega over the final min(10^4, steps) steps where it is defined.
  std::optional<double> tail_omega;
  /// Every beta finite and >= 0.
  bool beta_valid = true;
  /// Tabular: greedy-policy return.
  std::optional<double> greedy_return;
  /// Deep: mean length of the last 50 finished episodes.
  std::optional<double> tail_episode_length;
  std::filesystem::path curve_file;
  std::optional<std::filesystem::path> checkpoint;
};

struct RunResult {
  std::vector<SeedSummary> seeds;
  std::filesystem::path summary_file;
};

/// Curve file name for one seed: "<variant>_seed<N>.csv".
std::filesystem::path curve_file_name(Variant variant, std::uint64_t seed);

/// Validates the config, trains every seed (in parallel), writes one curve
/// file per seed and "<variant>_summary.json" into out_dir.
RunResult run_tabular(const RunConfig& config);
RunResult run_deep(const RunConfig& config);

Json to_json(const SeedSummary& summary);

}  // namespace stochq
