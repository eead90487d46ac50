#include "stochq/mdp.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "stochq/errors.hpp"
#include "stochq/rng.hpp"

namespace stochq {

FiniteMdp::FiniteMdp(std::size_t n_states, std::size_t n_actions, std::vector<double> transition,
                     std::vector<double> reward)
    : n_states_(n_states),
      n_actions_(n_actions),
      transition_(std::move(transition)),
      reward_(std::move(reward)) {
  if (n_states_ == 0 || n_actions_ == 0) throw Error(ErrorCode::invalid_spec, "empty MDP");
  if (transition_.size() != n_states_ * n_actions_ * n_states_ ||
      reward_.size() != n_states_ * n_actions_) {
    throw Error(ErrorCode::invalid_spec, "MDP table sizes do not match dimensions");
  }
  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      const auto row = next_distribution(s, a);
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw Error(ErrorCode::invalid_spec, "negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw Error(ErrorCode::invalid_spec, "transition row does not sum to 1");
      }
      if (!std::isfinite(this->reward(s, a))) throw Error(ErrorCode::invalid_spec, "non-finite reward");
    }
  }
}

FiniteMdp make_random_mdp(std::size_t n_states, std::size_t n_actions, RewardDistribution rewards,
                          std::uint64_t seed) {
  if (n_states == 0 || n_actions == 0) throw Error(ErrorCode::invalid_spec, "empty MDP");
  if (rewards.kind == RewardDistribution::Kind::normal && !(rewards.b >= 0.0)) {
    throw Error(ErrorCode::invalid_spec, "reward std must be non-negative");
  }
  if (rewards.kind == RewardDistribution::Kind::uniform && !(rewards.b > rewards.a)) {
    throw Error(ErrorCode::invalid_spec, "empty reward interval");
  }
  Rng rng(seed);
  std::vector<double> reward(n_states * n_actions);
  if (rewards.kind == RewardDistribution::Kind::normal) {
    std::normal_distribution<double> dist(rewards.a, rewards.b);
    for (double& r : reward) r = dist(rng);
  } else {
    std::uniform_real_distribution<double> dist(rewards.a, rewards.b);
    for (double& r : reward) r = dist(rng);
  }

  // Dirichlet(1,...,1) == normalized iid Exp(1).
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> transition(n_states * n_actions * n_states);
  for (std::size_t row = 0; row < n_states * n_actions; ++row) {
    double* p = transition.data() + row * n_states;
    double sum = 0.0;
    for (std::size_t j = 0; j < n_states; ++j) {
      p[j] = expo(rng);
      sum += p[j];
    }
    for (std::size_t j = 0; j < n_states; ++j) p[j] /= sum;
  }
  return FiniteMdp(n_states, n_actions, std::move(transition), std::move(reward));
}

}  // namespace stochq
