#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace stochq {

/// Tabular MDP: transition[s][a][s'] and reward[s][a], stored flat.
class FiniteMdp {
 public:
  FiniteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
            std::vector<double> reward);

  std::size_t n_states() const noexcept { return n_states_; }
  std::size_t n_actions() const noexcept { return n_actions_; }

  double reward(std::size_t s, std::size_t a) const { return reward_[s * n_actions_ + a]; }
  double transition(std::size_t s, std::size_t a, std::size_t next) const {
    return transition_[(s * n_actions_ + a) * n_states_ + next];
  }
  std::span<const double> next_distribution(std::size_t s, std::size_t a) const {
    return {transition_.data() + (s * n_actions_ + a) * n_states_, n_states_};
  }
  std::span<const double> rewards() const noexcept { return reward_; }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::vector<double> transition_;
  std::vector<double> reward_;
};

struct RewardDistribution {
  enum class Kind { normal, uniform } kind = Kind::uniform;
  // normal: (mean, std); uniform: [a, b)
  double a = 0.0;
  double b = 1.0;

  static RewardDistribution normal(double mean, double std) { return {Kind::normal, mean, std}; }
  static RewardDistribution uniform(double lo, double hi) { return {Kind::uniform, lo, hi}; }
};

/// Random MDP: every P(.|s,a) row drawn from a symmetric Dirichlet(1), every
/// r(s,a) drawn once from `rewards`. Deterministic in `seed`.
FiniteMdp make_random_mdp(std::size_t n_states, std::size_t n_actions, RewardDistribution rewards,
                          std::uint64_t seed);

}  // namespace stochq
