#include "stochq/tabular.hpp"

#include <cmath>
#include <string>

namespace stochq {

QTable::QTable(std::size_t n_states, std::size_t n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      values_(n_states * n_actions, 0.0),
      visits_(n_states * n_actions, 1),
      state_visits_(n_states, 1) {
  if (n_states == 0 || n_actions == 0) throw Error(ErrorCode::invalid_config, "empty Q-table");
}

void TabularAgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_config, "gamma must lie in [0, 1]");
  // Robbins-Monro: sum z^-w diverges and sum z^-2w converges iff 1/2 < w <= 1.
  if (!(lr_exponent > 0.5 && lr_exponent <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "lr_exponent must lie in (0.5, 1]");
  }
  if (memory == MemoryMode::global) {
    throw Error(ErrorCode::invalid_config, "tabular agents use per-state or no memory");
  }
  if (memory_capacity < 1) throw Error(ErrorCode::invalid_config, "memory_capacity must be >= 1");
  if (fixed_epsilon && !(*fixed_epsilon >= 0.0 && *fixed_epsilon <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "fixed_epsilon must lie in [0, 1]");
  }
}

double learning_rate(std::uint64_t z, double exponent) {
  return std::pow(static_cast<double>(z), -exponent);
}

double exploration_rate(std::uint64_t state_visits) {
  return 1.0 / std::sqrt(static_cast<double>(state_visits));
}

namespace {

void apply_step(QTable& q, const TabularTransition& t, double target, double lr_exponent) {
  const double alpha = learning_rate(q.visits(t.state, t.action), lr_exponent);
  double& v = q(t.state, t.action);
  v = (1.0 - alpha) * v + alpha * target;
  q.count_visit(t.state, t.action);
}

}  // namespace

void q_update(QTable& q, const TabularTransition& t, const TabularAgentConfig& config,
              SubsetSampler& sampler, ActionMemory& memory) {
  double bootstrap = 0.0;
  if (!t.terminal) {
    auto value = [&](ActionId b) { return q(t.next_state, b); };
    if (config.maximization == Maximization::stochastic) {
      bootstrap = stoch_max(value, build_candidates(sampler, memory, t.next_state));
    } else {
      bootstrap = exact_best(value, q.n_actions()).second;
    }
  }
  apply_step(q, t, t.reward + config.gamma * bootstrap, config.lr_exponent);
}

bool double_q_update(QTable& qa, QTable& qb, const TabularTransition& t,
                     const TabularAgentConfig& config, SubsetSampler& sampler, ActionMemory& memory,
                     Rng& rng) {
  const bool update_a = uniform_unit(rng) < 0.5;
  QTable& learner = update_a ? qa : qb;
  QTable& evaluator = update_a ? qb : qa;
  double bootstrap = 0.0;
  if (!t.terminal) {
    auto value = [&](ActionId b) { return learner(t.next_state, b); };
    const ActionId best = config.maximization == Maximization::stochastic
        ? stoch_argmax(value, build_candidates(sampler, memory, t.next_state))
        : exact_best(value, learner.n_actions()).first;
    bootstrap = evaluator(t.next_state, best);
  }
  apply_step(learner, t, t.reward + config.gamma * bootstrap, config.lr_exponent);
  evaluator.count_state(t.state);
  return update_a;
}

void sarsa_update(QTable& q, const TabularTransition& t, ActionId next_action,
                  const TabularAgentConfig& config) {
  const double bootstrap = t.terminal ? 0.0 : q(t.next_state, next_action);
  apply_step(q, t, t.reward + config.gamma * bootstrap, config.lr_exponent);
}

namespace {

ActionMemory make_memory(const TabularAgentConfig& config, std::size_t n_states) {
  if (config.maximization == Maximization::exact || config.memory == MemoryMode::none) {
    return ActionMemory::none();
  }
  return ActionMemory::per_state(n_states, config.memory_capacity);
}

std::size_t resolve_k(const TabularAgentConfig& config, std::size_t n_actions) {
  return config.subset_size == 0 ? default_subset_size(n_actions) : config.subset_size;
}

const TabularAgentConfig& validated(const TabularAgentConfig& config) {
  config.validate();
  return config;
}

}  // namespace

TabularAgent::TabularAgent(std::size_t n_states, std::size_t n_actions, TabularAgentConfig config,
                           std::uint64_t seed)
    : config_(validated(config)),
      table_a_(n_states, n_actions),
      table_b_(n_states, n_actions),
      select_sampler_(n_actions, resolve_k(config_, n_actions), derive_seed(seed, SeedStream::sampler)),
      update_sampler_(n_actions, resolve_k(config_, n_actions),
                      derive_seed(derive_seed(seed, SeedStream::sampler), 1)),
      memory_(make_memory(config_, n_states)),
      rng_(derive_seed(seed, SeedStream::agent)) {}

double TabularAgent::epsilon(std::size_t state) const {
  if (config_.fixed_epsilon) return *config_.fixed_epsilon;
  return exploration_rate(table_a_.state_visits(state));
}

double TabularAgent::value(std::size_t state, ActionId a) const {
  if (config_.algorithm == TabularAlgorithm::double_q) return table_a_(state, a) + table_b_(state, a);
  return table_a_(state, a);
}

Selection TabularAgent::act(std::size_t state) {
  if (state >= n_states()) throw Error(ErrorCode::index_out_of_range, "state " + std::to_string(state));
  auto values = [&](ActionId a) { return value(state, a); };
  return select_action(values, n_actions(), state, epsilon(state), config_.maximization,
                       select_sampler_, memory_, rng_);
}

void TabularAgent::learn(const TabularTransition& t) {
  switch (config_.algorithm) {
    case TabularAlgorithm::q_learning:
      q_update(table_a_, t, config_, update_sampler_, memory_);
      break;
    case TabularAlgorithm::double_q:
      double_q_update(table_a_, table_b_, t, config_, update_sampler_, memory_, rng_);
      break;
    case TabularAlgorithm::sarsa:
      throw Error(ErrorCode::invalid_config, "Sarsa needs the next action; use learn_sarsa");
  }
}

void TabularAgent::learn_sarsa(const TabularTransition& t, ActionId next_action) {
  if (config_.algorithm != TabularAlgorithm::sarsa) {
    throw Error(ErrorCode::invalid_config, "learn_sarsa on a non-Sarsa agent");
  }
  sarsa_update(table_a_, t, next_action, config_);
}

ActionId TabularAgent::greedy_action(std::size_t state) const {
  return exact_best([&](ActionId a) { return value(state, a); }, n_actions()).first;
}

}  // namespace stochq
