#pragma once

// Deep value-based agents over a discretized action space: DQN and Double
// DQN, each with exact or stochastic maximization.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "stochq/envs.hpp"
#include "stochq/metrics.hpp"
#include "stochq/mlp.hpp"
#include "stochq/replay_buffer.hpp"
#include "stochq/stochmax.hpp"

namespace stochq {

enum class DeepAlgorithm { dqn, ddqn };

struct DeepAgentConfig {
  double gamma = 0.99;
  double learning_rate = 0.001;
  double epsilon_init = 1.0;
  double epsilon_decay = 0.995;
  double epsilon_min = 0.01;
  /// Soft target update rate.
  double tau = 0.01;
  DeepAlgorithm algorithm = DeepAlgorithm::dqn;
  Maximization maximization = Maximization::stochastic;
  /// Random-subset size; 0 means ceil(log2 n).
  std::size_t subset_size = 0;
  MemoryMode memory = MemoryMode::global;
  std::vector<std::size_t> hidden = {64, 64};
  /// Evaluate the exact max every step for beta/omega (n extra network calls).
  bool track_exact_max = true;
  bool record_timing = true;

  /// Throws invalid_config.
  void validate() const;
};

/// max(epsilon_min, epsilon_init * epsilon_decay^episode)
double epsilon_schedule(std::size_t episode, const DeepAgentConfig& config);

struct DeepTransition {
  std::vector<double> state;
  ActionId action;
  std::vector<double> action_features;
  double reward = 0.0;
  std::vector<double> next_state;
  bool terminal = false;
};

struct DeepCounters {
  std::uint64_t selection_calls = 0;
  std::uint64_t target_calls = 0;
  std::uint64_t metric_calls = 0;
  std::uint64_t gradient_steps = 0;
};

class DeepAgent {
 public:
  DeepAgent(std::size_t state_dim, DiscretizedActionMap action_map, DeepAgentConfig config,
            std::uint64_t seed);

  const DeepAgentConfig& config() const noexcept { return config_; }
  const DiscretizedActionMap& action_map() const noexcept { return map_; }
  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t n_actions() const noexcept { return map_.size(); }
  std::size_t batch_size() const noexcept { return batch_size_; }
  const ReplayBuffer<DeepTransition>& buffer() const noexcept { return buffer_; }
  const DeepCounters& counters() const noexcept { return counters_; }

  /// Online and target parameters; `which` selects the second network of DDQN.
  const MlpParams& online(std::size_t which = 0) const { return online_.at(which); }
  const MlpParams& target(std::size_t which = 0) const { return target_.at(which); }
  void set_online(const MlpParams& params, std::size_t which = 0);
  void set_target(const MlpParams& params, std::size_t which = 0);

  /// Policy value Q(s, a) (sum of both networks for DDQN).
  double value(std::span<const double> state, ActionId action) const;

  /// Epsilon-greedy policy query at `state`.
  Selection select_action(std::span<const double> state, double epsilon);

  /// Bootstrapped regression target. `learner` is the network being updated
  /// (always 0 for DQN).
  double compute_target(const DeepTransition& t, std::size_t learner = 0);

  void remember(DeepTransition t);

  /// One gradient step on a fresh batch followed by the soft target update.
  /// Returns false (and does nothing) when the buffer holds fewer than
  /// batch_size() transitions.
  bool learn();

  /// One environment interaction plus learn(); returns the step's metrics.
  MetricsRecord train_step(ContinuousEnvironment& env);

  std::uint64_t steps() const noexcept { return step_; }
  std::uint64_t episodes() const noexcept { return episode_; }
  double current_epsilon() const { return epsilon_schedule(episode_, config_); }
  const std::vector<std::size_t>& episode_lengths() const noexcept { return episode_lengths_; }

  /// Text checkpoint: config, networks, counters and the exploration stream.
  /// Replay buffer and action memory are not persisted.
  void save_checkpoint(const std::filesystem::path& path) const;
  static DeepAgent load_checkpoint(const std::filesystem::path& path);

 private:
  DeepAgentConfig config_;
  std::size_t state_dim_;
  DiscretizedActionMap map_;
  std::uint64_t seed_;
  std::size_t k_;
  std::size_t batch_size_;
  std::vector<MlpParams> online_;
  std::vector<MlpParams> target_;
  ReplayBuffer<DeepTransition> buffer_;
  SubsetSampler select_sampler_;
  SubsetSampler target_sampler_;
  ActionMemory memory_;
  Rng rng_;
  DeepCounters counters_;

  std::vector<double> features_scratch_;
  std::vector<double> obs_;
  bool episode_active_ = false;
  std::uint64_t step_ = 0;
  std::uint64_t episode_ = 0;
  std::size_t episode_steps_ = 0;
  double cumulative_reward_ = 0.0;
  std::vector<std::size_t> episode_lengths_;
};

}  // namespace stochq
