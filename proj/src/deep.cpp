#include "stochq/deep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stochq/serialization.hpp"

namespace stochq {

void DeepAgentConfig::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::invalid_config, "gamma must lie in [0, 1]");
  if (!(learning_rate >= 0.0)) throw Error(ErrorCode::invalid_config, "learning_rate must be >= 0");
  if (!(epsilon_init >= 0.0 && epsilon_init <= 1.0) || !(epsilon_min >= 0.0 && epsilon_min <= 1.0) ||
      !(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
    throw Error(ErrorCode::invalid_config, "epsilon schedule out of range");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::invalid_config, "tau must lie in [0, 1]");
  if (memory == MemoryMode::per_state) {
    throw Error(ErrorCode::invalid_config, "continuous-state agents use global or no memory");
  }
  if (hidden.empty() || std::find(hidden.begin(), hidden.end(), 0u) != hidden.end()) {
    throw Error(ErrorCode::invalid_config, "hidden layer widths must be positive");
  }
}

double epsilon_schedule(std::size_t episode, const DeepAgentConfig& config) {
  return std::max(config.epsilon_min,
                  config.epsilon_init * std::pow(config.epsilon_decay, static_cast<double>(episode)));
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

std::vector<std::size_t> layer_sizes(std::size_t input, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> sizes{input};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  return sizes;
}

const DeepAgentConfig& validated(const DeepAgentConfig& c) {
  c.validate();
  return c;
}

std::size_t resolve_k(const DeepAgentConfig& c, std::size_t n) {
  return c.subset_size == 0 ? default_subset_size(n) : c.subset_size;
}

ActionMemory make_memory(const DeepAgentConfig& c, std::size_t n, std::uint64_t seed) {
  if (c.maximization == Maximization::exact || c.memory == MemoryMode::none) return ActionMemory::none();
  const std::size_t k = default_subset_size(n);
  return ActionMemory::global(2 * k, k, derive_seed(seed, SeedStream::memory));
}

}  // namespace

DeepAgent::DeepAgent(std::size_t state_dim, DiscretizedActionMap action_map, DeepAgentConfig config,
                     std::uint64_t seed)
    : config_(validated(config)),
      state_dim_(state_dim),
      map_(std::move(action_map)),
      seed_(seed),
      k_(resolve_k(config_, map_.size())),
      batch_size_(default_subset_size(map_.size())),
      buffer_(2 * default_subset_size(map_.size())),
      select_sampler_(map_.size(), k_, derive_seed(seed, SeedStream::sampler)),
      target_sampler_(map_.size(), k_, derive_seed(derive_seed(seed, SeedStream::sampler), 1)),
      memory_(make_memory(config_, map_.size(), seed)),
      rng_(derive_seed(seed, SeedStream::agent)),
      features_scratch_(map_.dims()) {
  if (state_dim == 0) throw Error(ErrorCode::invalid_config, "state_dim must be positive");
  Rng init(derive_seed(seed, SeedStream::network));
  const auto sizes = layer_sizes(state_dim + map_.dims(), config_.hidden);
  const std::size_t networks = config_.algorithm == DeepAlgorithm::ddqn ? 2 : 1;
  for (std::size_t i = 0; i < networks; ++i) {
    online_.push_back(MlpParams::random(sizes, init));
    target_.push_back(online_.back());
  }
}

void DeepAgent::set_online(const MlpParams& params, std::size_t which) {
  if (!params.same_shape(online_.at(which))) throw Error(ErrorCode::shape_mismatch, "set_online");
  online_[which] = params;
}

void DeepAgent::set_target(const MlpParams& params, std::size_t which) {
  if (!params.same_shape(target_.at(which))) throw Error(ErrorCode::shape_mismatch, "set_target");
  target_[which] = params;
}

double DeepAgent::value(std::span<const double> state, ActionId action) const {
  std::vector<double> input(state.begin(), state.end());
  const auto f = map_.features(action);
  input.insert(input.end(), f.begin(), f.end());
  double v = 0.0;
  for (const auto& net : online_) v += forward(net, input);
  return v;
}

Selection DeepAgent::select_action(std::span<const double> state, double epsilon) {
  if (state.size() != state_dim_) throw Error(ErrorCode::shape_mismatch, "state size");
  Selection out;
  if (config_.maximization == Maximization::stochastic) {
    out.candidates = build_candidates(select_sampler_, memory_, 0);
  }
  if (uniform_unit(rng_) < epsilon) {
    out.action = ActionId{uniform_index(rng_, map_.size())};
    return out;
  }
  out.exploited = true;
  std::vector<StateActionEvaluator> nets;
  nets.reserve(online_.size());
  for (const auto& p : online_) nets.emplace_back(p, state);
  auto q = [&](ActionId a) {
    map_.features_into(a, features_scratch_.data());
    double v = 0.0;
    for (auto& net : nets) v += net(features_scratch_);
    return v;
  };
  out.action = config_.maximization == Maximization::stochastic ? stoch_argmax(q, out.candidates)
                                                                : exact_best(q, map_.size()).first;
  for (const auto& net : nets) counters_.selection_calls += net.calls();
  return out;
}

double DeepAgent::compute_target(const DeepTransition& t, std::size_t learner) {
  if (t.terminal) return t.reward;
  const bool stochastic = config_.maximization == Maximization::stochastic;
  CandidateSet candidates;
  if (stochastic) candidates = build_candidates(target_sampler_, memory_, 0);

  double bootstrap = 0.0;
  if (config_.algorithm == DeepAlgorithm::dqn) {
    StateActionEvaluator eval(target_[0], t.next_state);
    auto q = [&](ActionId a) {
      map_.features_into(a, features_scratch_.data());
      return eval(features_scratch_);
    };
    bootstrap = stochastic ? stoch_max(q, candidates) : exact_best(q, map_.size()).second;
    counters_.target_calls += eval.calls();
  } else {
    // The learner's online weights pick b*, the other network's target copy scores it.
    StateActionEvaluator select(online_.at(learner), t.next_state);
    StateActionEvaluator score(target_.at(1 - learner), t.next_state);
    auto q = [&](ActionId a) {
      map_.features_into(a, features_scratch_.data());
      return select(features_scratch_);
    };
    const ActionId best = stochastic ? stoch_argmax(q, candidates) : exact_best(q, map_.size()).first;
    map_.features_into(best, features_scratch_.data());
    bootstrap = score(features_scratch_);
    counters_.target_calls += select.calls() + score.calls();
  }
  return t.reward + config_.gamma * bootstrap;
}

void DeepAgent::remember(DeepTransition t) {
  memory_.remember(0, t.action);
  buffer_.push(std::move(t));
}

bool DeepAgent::learn() {
  if (buffer_.size() < batch_size_) return false;
  const auto batch = buffer_.sample(batch_size_, rng_);
  std::size_t learner = 0;
  if (config_.algorithm == DeepAlgorithm::ddqn) learner = uniform_unit(rng_) < 0.5 ? 0 : 1;

  std::vector<RegressionSample> samples;
  samples.reserve(batch.size());
  for (const DeepTransition* t : batch) {
    RegressionSample s;
    s.input = t->state;
    s.input.insert(s.input.end(), t->action_features.begin(), t->action_features.end());
    s.target = compute_target(*t, learner);
    samples.push_back(std::move(s));
  }
  const MlpParams grad = gradient(online_[learner], samples);
  online_[learner].add_scaled(grad, -config_.learning_rate);
  for (std::size_t i = 0; i < online_.size(); ++i) target_[i].blend_toward(online_[i], config_.tau);
  ++counters_.gradient_steps;
  return true;
}

MetricsRecord DeepAgent::train_step(ContinuousEnvironment& env) {
  if (env.state_dim() != state_dim_ || env.n_actions() != map_.size()) {
    throw Error(ErrorCode::shape_mismatch, "environment does not match the agent");
  }
  if (!episode_active_) {
    obs_ = env.reset();
    episode_active_ = true;
    episode_steps_ = 0;
  }
  MetricsRecord rec;
  rec.step = step_;
  rec.episode = episode_;
  rec.epsilon = current_epsilon();

  const auto t0 = Clock::now();
  Selection sel = select_action(obs_, rec.epsilon);
  const auto t1 = Clock::now();

  const bool stochastic = config_.maximization == Maximization::stochastic;
  rec.candidates = stochastic ? sel.candidates.size() : map_.size();
  if (config_.track_exact_max) {
    std::vector<StateActionEvaluator> nets;
    for (const auto& p : online_) nets.emplace_back(p, obs_);
    auto q = [&](ActionId a) {
      map_.features_into(a, features_scratch_.data());
      double v = 0.0;
      for (auto& net : nets) v += net(features_scratch_);
      return v;
    };
    const double exact = exact_best(q, map_.size()).second;
    const double approx = stochastic ? stoch_max(q, sel.candidates) : exact;
    for (const auto& net : nets) counters_.metric_calls += net.calls();
    rec.beta = exact - approx;
    if (exact > 0.0) rec.omega = approx / exact;
  }

  const auto t2 = Clock::now();
  auto result = env.step(sel.action);
  const auto t3 = Clock::now();

  DeepTransition tr;
  tr.state = obs_;
  tr.action = sel.action;
  tr.action_features = map_.features(sel.action);
  tr.reward = result.reward;
  tr.next_state = result.next_state;
  tr.terminal = result.terminated;
  remember(std::move(tr));
  learn();
  const auto t4 = Clock::now();

  cumulative_reward_ += result.reward;
  rec.reward = result.reward;
  rec.cumulative_reward = cumulative_reward_;
  rec.selection_ns = elapsed_ns(t0, t1);
  rec.env_ns = elapsed_ns(t2, t3);
  rec.update_ns = elapsed_ns(t3, t4);
  if (config_.record_timing) {
    rec.wall_time_ns = std::max<std::uint64_t>(1, rec.selection_ns + rec.env_ns + rec.update_ns);
  }

  obs_ = std::move(result.next_state);
  ++step_;
  ++episode_steps_;
  if (result.terminated || result.truncated) {
    episode_lengths_.push_back(episode_steps_);
    ++episode_;
    episode_active_ = false;
  }
  return rec;
}

void DeepAgent::save_checkpoint(const std::filesystem::path& path) const {
  Json nets = Json::array();
  for (std::size_t i = 0; i < online_.size(); ++i) {
    nets.push_back(Json{{"online", to_json(online_[i])}, {"target", to_json(target_[i])}});
  }
  Json bounds = Json::array();
  for (const auto& [lo, hi] : map_.bounds()) bounds.push_back({lo, hi});
  std::ostringstream rng_state;
  rng_state << rng_;
  const Json doc{
      {"format", "stochq-checkpoint"},
      {"version", 1},
      {"config", to_json(config_)},
      {"seed", seed_},
      {"state_dim", state_dim_},
      {"action_map", Json{{"granularity", map_.granularity()}, {"bounds", bounds}}},
      {"networks", nets},
      {"step", step_},
      {"episode", episode_},
      {"cumulative_reward", cumulative_reward_},
      {"rng", rng_state.str()},
  };
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write checkpoint " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing checkpoint " + path.string());
}

DeepAgent DeepAgent::load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read checkpoint " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
    if (doc.at("format") != "stochq-checkpoint" || doc.at("version") != 1) {
      throw Error(ErrorCode::malformed_file, "not a version-1 checkpoint");
    }
    std::vector<std::pair<double, double>> bounds;
    for (const auto& b : doc.at("action_map").at("bounds")) bounds.emplace_back(b.at(0), b.at(1));
    DiscretizedActionMap map(doc.at("action_map").at("granularity").get<std::size_t>(), bounds);
    DeepAgent agent(doc.at("state_dim").get<std::size_t>(), std::move(map),
                    deep_config_from_json(doc.at("config")), doc.at("seed").get<std::uint64_t>());
    const auto& nets = doc.at("networks");
    if (nets.size() != agent.online_.size()) throw Error(ErrorCode::malformed_file, "network count");
    for (std::size_t i = 0; i < nets.size(); ++i) {
      agent.set_online(mlp_params_from_json(nets[i].at("online")), i);
      agent.set_target(mlp_params_from_json(nets[i].at("target")), i);
    }
    agent.step_ = doc.at("step").get<std::uint64_t>();
    agent.episode_ = doc.at("episode").get<std::uint64_t>();
    agent.cumulative_reward_ = doc.at("cumulative_reward").get<double>();
    std::istringstream rng_state(doc.at("rng").get<std::string>());
    rng_state >> agent.rng_;
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_file, std::string("checkpoint: ") + e.what());
  }
}

}  // namespace stochq
