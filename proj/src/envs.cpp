#include "stochq/envs.hpp"

#include <cmath>

namespace stochq {

// ---------------------------------------------------------------------------
// DiscretizedActionMap

DiscretizedActionMap::DiscretizedActionMap(std::size_t granularity,
                                           std::vector<std::pair<double, double>> bounds)
    : granularity_(granularity), bounds_(std::move(bounds)), size_(1) {
  if (granularity_ < 2) {
    throw Error(ErrorCode::invalid_granularity, "granularity must be >= 2");
  }
  if (bounds_.empty()) throw Error(ErrorCode::invalid_spec, "action map needs at least one dimension");
  for (const auto& [lo, hi] : bounds_) {
    if (!(hi > lo)) throw Error(ErrorCode::invalid_spec, "action bounds must satisfy lower < upper");
    if (size_ > (std::size_t{1} << 40) / granularity_) {
      throw Error(ErrorCode::invalid_spec, "discretized action space too large");
    }
    size_ *= granularity_;
  }
}

DiscretizedActionMap::DiscretizedActionMap(std::size_t dims, std::size_t granularity, double lower,
                                           double upper)
    : DiscretizedActionMap(granularity, std::vector<std::pair<double, double>>(dims, {lower, upper})) {}

std::vector<std::size_t> DiscretizedActionMap::digits(ActionId action) const {
  if (action.index >= size_) {
    throw Error(ErrorCode::index_out_of_range, "action " + std::to_string(action.index));
  }
  std::vector<std::size_t> out(dims());
  std::size_t rest = action.index;
  for (std::size_t j = dims(); j-- > 0;) {
    out[j] = rest % granularity_;
    rest /= granularity_;
  }
  return out;
}

ActionId DiscretizedActionMap::encode(const std::vector<std::size_t>& digits) const {
  if (digits.size() != dims()) throw Error(ErrorCode::shape_mismatch, "digit count != dims");
  std::size_t index = 0;
  for (std::size_t d : digits) {
    if (d >= granularity_) throw Error(ErrorCode::index_out_of_range, "digit out of range");
    index = index * granularity_ + d;
  }
  return ActionId{index};
}

std::vector<double> DiscretizedActionMap::decode(ActionId action) const {
  const auto ds = digits(action);
  std::vector<double> out(dims());
  const double steps = static_cast<double>(granularity_ - 1);
  for (std::size_t j = 0; j < dims(); ++j) {
    const auto [lo, hi] = bounds_[j];
    out[j] = lo + static_cast<double>(ds[j]) * (hi - lo) / steps;
  }
  return out;
}

std::vector<double> DiscretizedActionMap::features(ActionId action) const {
  std::vector<double> out(dims());
  features_into(action, out.data());
  return out;
}

void DiscretizedActionMap::features_into(ActionId action, double* out) const {
  if (action.index >= size_) {
    throw Error(ErrorCode::index_out_of_range, "action " + std::to_string(action.index));
  }
  std::size_t rest = action.index;
  const double steps = static_cast<double>(granularity_ - 1);
  for (std::size_t j = dims(); j-- > 0;) {
    out[j] = 2.0 * static_cast<double>(rest % granularity_) / steps - 1.0;
    rest /= granularity_;
  }
}

// ---------------------------------------------------------------------------
// GeneratedMdp

GeneratedMdp::GeneratedMdp(FiniteMdp mdp, std::size_t horizon, std::uint64_t seed)
    : mdp_(std::move(mdp)), horizon_(horizon), rng_(seed) {
  if (horizon_ == 0) throw Error(ErrorCode::invalid_spec, "horizon must be positive");
}

std::size_t GeneratedMdp::do_reset() {
  elapsed_ = 0;
  state_ = uniform_index(rng_, mdp_.n_states());
  return state_;
}

StepResult<std::size_t> GeneratedMdp::do_step(ActionId action) {
  StepResult<std::size_t> out;
  out.reward = mdp_.reward(state_, action.index);
  const auto row = mdp_.next_distribution(state_, action.index);
  const double u = uniform_unit(rng_);
  double acc = 0.0;
  std::size_t next = row.size() - 1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    acc += row[j];
    if (u < acc) {
      next = j;
      break;
    }
  }
  state_ = next;
  out.next_state = next;
  ++elapsed_;
  out.truncated = elapsed_ >= horizon_;
  return out;
}

GeneratedMdp make_generated_mdp(const GeneratedMdpSpec& spec) {
  if (spec.n_states == 0 || spec.n_actions == 0 || !(spec.reward_std >= 0.0) || spec.horizon == 0) {
    throw Error(ErrorCode::invalid_spec, "generated MDP spec");
  }
  auto tables = make_random_mdp(spec.n_states, spec.n_actions,
                                RewardDistribution::normal(spec.reward_mean, spec.reward_std),
                                derive_seed(spec.seed, 0));
  return GeneratedMdp(std::move(tables), spec.horizon, derive_seed(spec.seed, 1));
}

// ---------------------------------------------------------------------------
// CliffWalking

CliffWalking::CliffWalking(std::size_t max_steps) : max_steps_(max_steps) {}

bool CliffWalking::is_cliff(std::size_t state) noexcept {
  return state > kStart && state < kGoal;
}

std::size_t CliffWalking::do_reset() {
  state_ = kStart;
  elapsed_ = 0;
  return state_;
}

StepResult<std::size_t> CliffWalking::do_step(ActionId action) {
  std::size_t row = state_ / kCols;
  std::size_t col = state_ % kCols;
  switch (action.index) {
    case 0: row = row > 0 ? row - 1 : row; break;
    case 1: col = col + 1 < kCols ? col + 1 : col; break;
    case 2: row = row + 1 < kRows ? row + 1 : row; break;
    default: col = col > 0 ? col - 1 : col; break;
  }
  StepResult<std::size_t> out;
  const std::size_t next = row * kCols + col;
  if (is_cliff(next)) {
    out.reward = -100.0;
    state_ = kStart;
  } else {
    out.reward = -1.0;
    state_ = next;
  }
  out.next_state = state_;
  out.terminated = state_ == kGoal;
  ++elapsed_;
  out.truncated = !out.terminated && max_steps_ > 0 && elapsed_ >= max_steps_;
  return out;
}

CliffWalking make_cliff_walking() { return CliffWalking(); }

// ---------------------------------------------------------------------------
// FrozenLake

FrozenLake::FrozenLake(bool slippery, std::uint64_t seed, std::size_t max_steps)
    : slippery_(slippery), max_steps_(max_steps), rng_(seed) {}

char FrozenLake::tile(std::size_t state) noexcept { return kMap[state / 4][state % 4]; }

std::size_t FrozenLake::move(std::size_t state, std::size_t direction) noexcept {
  std::size_t row = state / 4;
  std::size_t col = state % 4;
  switch (direction % 4) {
    case 0: col = col > 0 ? col - 1 : col; break;
    case 1: row = row < 3 ? row + 1 : row; break;
    case 2: col = col < 3 ? col + 1 : col; break;
    default: row = row > 0 ? row - 1 : row; break;
  }
  return row * 4 + col;
}

std::size_t FrozenLake::do_reset() {
  state_ = 0;
  elapsed_ = 0;
  return state_;
}

StepResult<std::size_t> FrozenLake::do_step(ActionId action) {
  std::size_t direction = action.index;
  if (slippery_) {
    // (a-1) mod 4, a, (a+1) mod 4 with probability 1/3 each.
    direction = (action.index + 3 + uniform_index(rng_, 3)) % 4;
  }
  state_ = move(state_, direction);
  StepResult<std::size_t> out;
  out.next_state = state_;
  const char t = tile(state_);
  out.reward = t == 'G' ? 1.0 : 0.0;
  out.terminated = t == 'G' || t == 'H';
  ++elapsed_;
  out.truncated = !out.terminated && max_steps_ > 0 && elapsed_ >= max_steps_;
  return out;
}

FrozenLake make_frozen_lake(bool slippery, std::uint64_t seed) { return FrozenLake(slippery, seed); }

// ---------------------------------------------------------------------------
// Pendulum

Pendulum::Pendulum(std::size_t granularity, std::uint64_t seed, CartPoleParams params)
    : params_(params),
      map_(1, granularity, -params.force_limit, params.force_limit),
      rng_(seed) {}

std::vector<double> Pendulum::reset_to(const std::array<double, 4>& state) {
  begin_episode();
  state_ = state;
  elapsed_ = 0;
  return {state_.begin(), state_.end()};
}

std::vector<double> Pendulum::do_reset() {
  std::uniform_real_distribution<double> noise(-params_.reset_noise, params_.reset_noise);
  for (double& x : state_) x = noise(rng_);
  elapsed_ = 0;
  return {state_.begin(), state_.end()};
}

StepResult<std::vector<double>> Pendulum::do_step(ActionId action) {
  const double force = map_.decode(action)[0];
  auto& [x, x_dot, theta, theta_dot] = state_;

  const double total_mass = params_.cart_mass + params_.pole_mass;
  const double half_length = 0.5 * params_.pole_length;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double temp = (force + params_.pole_mass * half_length * theta_dot * theta_dot * sin_t) / total_mass;
  const double theta_acc = (params_.gravity * sin_t - cos_t * temp) /
      (half_length * (4.0 / 3.0 - params_.pole_mass * cos_t * cos_t / total_mass));
  const double x_acc = temp - params_.pole_mass * half_length * theta_acc * cos_t / total_mass;

  x_dot += params_.dt * x_acc;
  x += params_.dt * x_dot;
  theta_dot += params_.dt * theta_acc;
  theta += params_.dt * theta_dot;

  StepResult<std::vector<double>> out;
  out.next_state.assign(state_.begin(), state_.end());
  out.reward = 1.0;
  out.terminated = std::abs(theta) > params_.angle_limit || std::abs(x) > params_.position_limit;
  ++elapsed_;
  out.truncated = !out.terminated && elapsed_ >= params_.max_steps;
  return out;
}

Pendulum make_pendulum(std::size_t granularity, std::uint64_t seed) {
  return Pendulum(granularity, seed);
}

}  // namespace stochq
