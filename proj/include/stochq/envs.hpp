#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "stochq/mdp.hpp"
#include "stochq/rng.hpp"
#include "stochq/stochmax.hpp"

namespace stochq {

template <class State>
struct StepResult {
  State next_state{};
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// Episodic environment. Calling step() after the episode ended (terminated
/// or truncated) without reset() throws env_state.
template <class State>
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::size_t n_actions() const = 0;

  State reset() {
    begin_episode();
    return do_reset();
  }

  StepResult<State> step(ActionId action) {
    if (done_) throw Error(ErrorCode::env_state, "step() after episode end without reset()");
    if (action.index >= n_actions()) {
      throw Error(ErrorCode::index_out_of_range, "action " + std::to_string(action.index));
    }
    StepResult<State> result = do_step(action);
    done_ = result.terminated || result.truncated;
    return result;
  }

 protected:
  void begin_episode() noexcept { done_ = false; }
  virtual State do_reset() = 0;
  virtual StepResult<State> do_step(ActionId action) = 0;

 private:
  bool done_ = true;
};

class DiscreteEnvironment : public Environment<std::size_t> {
 public:
  virtual std::size_t n_states() const = 0;
};

/// Maps a flat action index to a d-dimensional grid of i evenly spaced
/// values per dimension (bounds inclusive), row-major: dimension 0 is the
/// most significant digit.
class DiscretizedActionMap {
 public:
  DiscretizedActionMap(std::size_t granularity, std::vector<std::pair<double, double>> bounds);
  /// Same bounds on every one of `dims` dimensions.
  DiscretizedActionMap(std::size_t dims, std::size_t granularity, double lower, double upper);

  std::size_t dims() const noexcept { return bounds_.size(); }
  std::size_t granularity() const noexcept { return granularity_; }
  std::size_t size() const noexcept { return size_; }
  const std::vector<std::pair<double, double>>& bounds() const noexcept { return bounds_; }

  std::vector<std::size_t> digits(ActionId action) const;
  ActionId encode(const std::vector<std::size_t>& digits) const;
  /// Physical action values.
  std::vector<double> decode(ActionId action) const;
  /// Per-dimension values rescaled to [-1, 1] (network input features).
  std::vector<double> features(ActionId action) const;
  void features_into(ActionId action, double* out) const;

 private:
  std::size_t granularity_;
  std::vector<std::pair<double, double>> bounds_;
  std::size_t size_;
};

class ContinuousEnvironment : public Environment<std::vector<double>> {
 public:
  virtual std::size_t state_dim() const = 0;
  virtual const DiscretizedActionMap& action_map() const = 0;
  std::size_t n_actions() const override { return action_map().size(); }
};

/// Discrete environment backed by FiniteMdp tables: no terminal states,
/// truncation after `horizon` steps, uniform random start state.
class GeneratedMdp final : public DiscreteEnvironment {
 public:
  GeneratedMdp(FiniteMdp mdp, std::size_t horizon, std::uint64_t seed);

  std::size_t n_states() const override { return mdp_.n_states(); }
  std::size_t n_actions() const override { return mdp_.n_actions(); }
  const FiniteMdp& tables() const noexcept { return mdp_; }

 protected:
  std::size_t do_reset() override;
  StepResult<std::size_t> do_step(ActionId action) override;

 private:
  FiniteMdp mdp_;
  std::size_t horizon_;
  Rng rng_;
  std::size_t state_ = 0;
  std::size_t elapsed_ = 0;
};

struct GeneratedMdpSpec {
  std::size_t n_states = 3;
  std::size_t n_actions = 256;
  double reward_mean = -50.0;
  double reward_std = 50.0;
  std::size_t horizon = 200;
  std::uint64_t seed = 0;
};

/// Rewards N(mean, std^2) iid per pair, Dirichlet(1) transition rows.
GeneratedMdp make_generated_mdp(const GeneratedMdpSpec& spec);

/// 4x12 cliff grid. Start bottom-left, goal bottom-right, cliff between.
/// Actions: 0 up, 1 right, 2 down, 3 left. -1 per move; entering the cliff
/// costs -100 and teleports to the start. Walls clamp.
class CliffWalking final : public DiscreteEnvironment {
 public:
  static constexpr std::size_t kRows = 4;
  static constexpr std::size_t kCols = 12;
  static constexpr std::size_t kStart = 3 * kCols;
  static constexpr std::size_t kGoal = 3 * kCols + kCols - 1;

  /// max_steps == 0 disables truncation.
  explicit CliffWalking(std::size_t max_steps = 0);

  std::size_t n_states() const override { return kRows * kCols; }
  std::size_t n_actions() const override { return 4; }

  static bool is_cliff(std::size_t state) noexcept;

 protected:
  std::size_t do_reset() override;
  StepResult<std::size_t> do_step(ActionId action) override;

 private:
  std::size_t max_steps_;
  std::size_t state_ = kStart;
  std::size_t elapsed_ = 0;
};

CliffWalking make_cliff_walking();

/// 4x4 lake "SFFF/FHFH/FFFH/HFFG". Actions: 0 left, 1 down, 2 right, 3 up.
/// Slippery: intended direction or either perpendicular, 1/3 each.
class FrozenLake final : public DiscreteEnvironment {
 public:
  static constexpr std::array<const char*, 4> kMap = {"SFFF", "FHFH", "FFFH", "HFFG"};

  FrozenLake(bool slippery, std::uint64_t seed, std::size_t max_steps = 100);

  std::size_t n_states() const override { return 16; }
  std::size_t n_actions() const override { return 4; }

  static char tile(std::size_t state) noexcept;
  /// Deterministic successor for moving in `direction` from `state`.
  static std::size_t move(std::size_t state, std::size_t direction) noexcept;

 protected:
  std::size_t do_reset() override;
  StepResult<std::size_t> do_step(ActionId action) override;

 private:
  bool slippery_;
  std::size_t max_steps_;
  Rng rng_;
  std::size_t state_ = 0;
  std::size_t elapsed_ = 0;
};

FrozenLake make_frozen_lake(bool slippery, std::uint64_t seed = 0);

struct CartPoleParams {
  double gravity = 9.81;
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double pole_length = 0.6;
  double dt = 0.02;
  double force_limit = 3.0;
  double angle_limit = 0.2;
  double position_limit = 1.0;
  std::size_t max_steps = 1000;
  double reset_noise = 0.01;
};

/// Cart-pole balance task with a discretized horizontal force.
/// State: (cart position, cart velocity, pole angle, pole angular velocity).
/// Reward +1 per step. Semi-implicit Euler integration.
class Pendulum final : public ContinuousEnvironment {
 public:
  Pendulum(std::size_t granularity, std::uint64_t seed, CartPoleParams params = {});

  std::size_t state_dim() const override { return 4; }
  const DiscretizedActionMap& action_map() const override { return map_; }
  const CartPoleParams& params() const noexcept { return params_; }

  /// Starts a new episode from an explicit state.
  std::vector<double> reset_to(const std::array<double, 4>& state);

 protected:
  std::vector<double> do_reset() override;
  StepResult<std::vector<double>> do_step(ActionId action) override;

 private:
  CartPoleParams params_;
  DiscretizedActionMap map_;
  Rng rng_;
  std::array<double, 4> state_{};
  std::size_t elapsed_ = 0;
};

/// Throws invalid_granularity for granularity < 2.
Pendulum make_pendulum(std::size_t granularity = 512, std::uint64_t seed = 0);

}  // namespace stochq
