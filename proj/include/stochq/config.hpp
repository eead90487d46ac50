#pragma once

// Experiment description read from a JSON file. Every key is optional and
// falls back to the defaults below; unknown keys are rejected.
//
//   {
//     "env": {"kind": "cliff-walking" | "frozen-lake" | "generated-mdp" | "pendulum", ...},
//     "variant": "stoch-q",
//     "seeds": [0, 1, 2],
//     "steps": 100000,
//     "k": 0,
//     "memory": "per-state" | "global" | "none" (default depends on the variant),
//     "out_dir": "runs",
//     "record_timing": true,
//     "threads": 0,
//     "checkpoint_every": 0,
//     "eval_episodes": 100,
//     "summary_window": 0,
//     "tabular": {"gamma": 0.95, "lr_exponent": 0.8, "memory_capacity": 2, "fixed_epsilon": null},
//     "deep": {"gamma": 0.99, "learning_rate": 0.001, "epsilon_init": 1.0, "epsilon_decay": 0.995,
//              "epsilon_min": 0.01, "tau": 0.01, "hidden": [64, 64], "track_exact_max": true}
//   }

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stochq/deep.hpp"
#include "stochq/serialization.hpp"
#include "stochq/tabular.hpp"

namespace stochq {

enum class EnvKind { cliff_walking, frozen_lake, generated_mdp, pendulum };

std::string_view to_string(EnvKind kind);

struct EnvConfig {
  EnvKind kind = EnvKind::cliff_walking;
  // frozen-lake
  bool slippery = true;
  // generated-mdp
  std::size_t n_states = 3;
  std::size_t n_actions = 256;
  double reward_mean = -50.0;
  double reward_std = 50.0;
  std::size_t horizon = 200;
  /// Seed of the generated tables; shared by all run seeds so every seed
  /// faces the same MDP.
  std::uint64_t mdp_seed = 0;
  // pendulum
  std::size_t granularity = 512;
  /// Episode truncation; 0 keeps the environment default.
  std::size_t max_steps = 0;

  bool discrete() const noexcept { return kind != EnvKind::pendulum; }
  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

enum class Variant {
  q, stoch_q, double_q, stoch_double_q, sarsa, stoch_sarsa, dqn, stoch_dqn, ddqn, stoch_ddqn
};

std::string_view to_string(Variant v);
/// Throws invalid_config for unknown names.
Variant parse_variant(std::string_view name);
bool is_deep(Variant v) noexcept;
bool is_stochastic(Variant v) noexcept;

struct TabularHyper {
  double gamma = 0.95;
  double lr_exponent = 0.8;
  std::size_t memory_capacity = 2;
  std::optional<double> fixed_epsilon;
  friend bool operator==(const TabularHyper&, const TabularHyper&) = default;
};

struct DeepHyper {
  double gamma = 0.99;
  double learning_rate = 0.001;
  double epsilon_init = 1.0;
  double epsilon_decay = 0.995;
  double epsilon_min = 0.01;
  double tau = 0.01;
  std::vector<std::size_t> hidden = {64, 64};
  bool track_exact_max = true;
  friend bool operator==(const DeepHyper&, const DeepHyper&) = default;
};

struct RunConfig {
  EnvConfig env;
  Variant variant = Variant::stoch_q;
  std::vector<std::uint64_t> seeds = {0};
  std::uint64_t steps = 100000;
  /// Random-subset size; 0 means ceil(log2 n).
  std::size_t k = 0;
  std::optional<MemoryMode> memory;
  std::filesystem::path out_dir = "runs";
  /// false omits wall_time_ns so curve files are byte-reproducible.
  bool record_timing = true;
  /// Worker threads for the seed fan-out; 0 uses the hardware concurrency.
  std::size_t threads = 0;
  /// Deep runs: checkpoint every this many steps (0 only at the end).
  std::uint64_t checkpoint_every = 0;
  /// Greedy evaluation episodes for the tabular summary.
  std::size_t eval_episodes = 100;
  /// Reward smoothing window for summaries; 0 picks 1000 (tabular) or 100 (deep).
  std::size_t summary_window = 0;
  TabularHyper tabular;
  DeepHyper deep;

  /// Throws invalid_config for inconsistent settings.
  void validate() const;
  MemoryMode resolved_memory() const;
  std::size_t resolved_window() const;
  TabularAgentConfig tabular_agent() const;
  DeepAgentConfig deep_agent() const;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

Json to_json(const RunConfig& config);
/// Throws invalid_config.
RunConfig run_config_from_json(const Json& j);
/// Throws io or invalid_config.
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace stochq
