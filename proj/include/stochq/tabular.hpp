#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "stochq/rng.hpp"
#include "stochq/stochmax.hpp"

namespace stochq {

/// Dense |S| x |A| value table with visit counts z(s,a) and z(s), both
/// starting at 1.
class QTable {
 public:
  QTable(std::size_t n_states, std::size_t n_actions);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double& operator()(std::size_t s, ActionId a) { return values_[s * n_actions_ + a.index]; }
  double operator()(std::size_t s, ActionId a) const { return values_[s * n_actions_ + a.index]; }
  std::span<const double> row(std::size_t s) const { return {values_.data() + s * n_actions_, n_actions_}; }
  std::span<const double> values() const noexcept { return values_; }

  std::uint64_t visits(std::size_t s, ActionId a) const { return visits_[s * n_actions_ + a.index]; }
  std::uint64_t state_visits(std::size_t s) const { return state_visits_[s]; }
  void count_visit(std::size_t s, ActionId a) {
    ++visits_[s * n_actions_ + a.index];
    ++state_visits_[s];
  }
  void count_state(std::size_t s) { ++state_visits_[s]; }

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> values_;
  std::vector<std::uint64_t> visits_;
  std::vector<std::uint64_t> state_visits_;
};

enum class TabularAlgorithm { q_learning, double_q, sarsa };

struct TabularAgentConfig {
  double gamma = 0.95;
  double lr_exponent = 0.8;
  TabularAlgorithm algorithm = TabularAlgorithm::q_learning;
  Maximization maximization = Maximization::stochastic;
  /// Random-subset size; 0 means ceil(log2 n).
  std::size_t subset_size = 0;
  MemoryMode memory = MemoryMode::per_state;
  std::size_t memory_capacity = 2;
  /// Overrides the 1/sqrt(z(s)) schedule when set.
  std::optional<double> fixed_epsilon;

  /// Throws invalid_config.
  void validate() const;
};

/// alpha = z^(-exponent).
double learning_rate(std::uint64_t z, double exponent = 0.8);
/// epsilon(s) = 1/sqrt(z(s)).
double exploration_rate(std::uint64_t state_visits);

struct TabularTransition {
  std::size_t state = 0;
  ActionId action;
  double reward = 0.0;
  std::size_t next_state = 0;
  bool terminal = false;
};

/// Epsilon-greedy over stoch_argmax (stochastic) or argmax (exact).
/// Exploited actions are written into `memory`; exploratory ones are not.
/// In stochastic mode C is drawn on every call so per-step diagnostics can
/// use it, whether or not the greedy branch is taken.
template <ValueOracle F>
Selection select_action(F&& values, std::size_t n_actions, std::size_t state, double epsilon,
                        Maximization mode, SubsetSampler& sampler, ActionMemory& memory, Rng& rng) {
  Selection out;
  if (mode == Maximization::stochastic) out.candidates = build_candidates(sampler, memory, state);
  if (uniform_unit(rng) < epsilon) {
    out.action = ActionId{uniform_index(rng, n_actions)};
    return out;
  }
  out.exploited = true;
  out.action = mode == Maximization::stochastic ? stoch_argmax(values, out.candidates)
                                                : exact_best(values, n_actions).first;
  if (mode == Maximization::stochastic) memory.remember(state, out.action);
  return out;
}

/// One (stochastic) Q-learning step. The bootstrap maximum is taken over a
/// freshly drawn C at s' (stochastic) or over all of A (exact); terminal s'
/// bootstraps 0. Increments z(s,a) and z(s).
void q_update(QTable& q, const TabularTransition& t, const TabularAgentConfig& config,
              SubsetSampler& sampler, ActionMemory& memory);

/// One (stochastic) Double Q-learning step; a fair coin picks which table is
/// updated. Returns true when `qa` was updated.
bool double_q_update(QTable& qa, QTable& qb, const TabularTransition& t,
                     const TabularAgentConfig& config, SubsetSampler& sampler, ActionMemory& memory,
                     Rng& rng);

/// On-policy step toward r + gamma * Q(s', a').
void sarsa_update(QTable& q, const TabularTransition& t, ActionId next_action,
                  const TabularAgentConfig& config);

/// Owns the tables, sampler, memory and exploration stream of one run.
class TabularAgent {
 public:
  TabularAgent(std::size_t n_states, std::size_t n_actions, TabularAgentConfig config,
               std::uint64_t seed);

  const TabularAgentConfig& config() const noexcept { return config_; }
  std::size_t n_states() const noexcept { return table_a_.n_states(); }
  std::size_t n_actions() const noexcept { return table_a_.n_actions(); }

  double epsilon(std::size_t state) const;
  /// Policy query at `state`; the returned candidates are those just used.
  Selection act(std::size_t state);
  /// Q-learning / Double Q-learning update. Not valid for Sarsa.
  void learn(const TabularTransition& t);
  /// Sarsa update with the already selected next action.
  void learn_sarsa(const TabularTransition& t, ActionId next_action);

  /// Combined value used by the policy (Q, or Q^A + Q^B).
  double value(std::size_t state, ActionId a) const;
  /// Exact argmax of value(state, .), lowest index on ties.
  ActionId greedy_action(std::size_t state) const;

  const QTable& table() const noexcept { return table_a_; }
  const QTable& table_b() const noexcept { return table_b_; }

 private:
  TabularAgentConfig config_;
  QTable table_a_;
  QTable table_b_;
  SubsetSampler select_sampler_;
  SubsetSampler update_sampler_;
  ActionMemory memory_;
  Rng rng_;
};

}  // namespace stochq
