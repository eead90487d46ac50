#include "stochq/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "stochq/analysis.hpp"
#include "stochq/curve_file.hpp"

namespace stochq {

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t elapsed_ns(Clock::time_point from, Clock::time_point to) {
  return static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(to - from).count());
}

// Running aggregates over the emitted records.
class SummaryBuilder {
 public:
  SummaryBuilder(std::uint64_t total_steps, std::size_t window)
      : total_(total_steps), window_(std::min<std::uint64_t>(window, total_steps)) {}

  void add(const MetricsRecord& r) {
    if (r.step + window_ >= total_) {
      window_sum_ += r.reward;
      ++window_count_;
    }
    if (r.wall_time_ns) {
      time_sum_ += static_cast<double>(*r.wall_time_ns);
      ++time_count_;
    }
    if (r.beta && !(std::isfinite(*r.beta) && *r.beta >= 0.0)) beta_valid_ = false;
    if (r.step + kTail >= total_ && r.omega) {
      omega_sum_ += *r.omega;
      ++omega_count_;
    }
    last_ = r;
  }

  SeedSummary finish(std::uint64_t seed, std::uint64_t episodes) const {
    SeedSummary s;
    s.seed = seed;
    s.steps = last_.step + 1;
    s.episodes = episodes;
    s.final_cumulative_reward = last_.cumulative_reward;
    s.window = window_count_;
    s.mean_window_reward = window_count_ ? window_sum_ / static_cast<double>(window_count_) : 0.0;
    if (time_count_) s.mean_step_ns = time_sum_ / static_cast<double>(time_count_);
    if (omega_count_) s.tail_omega = omega_sum_ / static_cast<double>(omega_count_);
    s.beta_valid = beta_valid_;
    return s;
  }

 private:
  static constexpr std::uint64_t kTail = 10000;
  std::uint64_t total_;
  std::uint64_t window_;
  double window_sum_ = 0.0;
  std::size_t window_count_ = 0;
  double time_sum_ = 0.0;
  std::size_t time_count_ = 0;
  double omega_sum_ = 0.0;
  std::size_t omega_count_ = 0;
  bool beta_valid_ = true;
  MetricsRecord last_;
};

template <class Fn>
std::vector<SeedSummary> fan_out(const RunConfig& config, Fn&& run_seed) {
  const std::size_t n = config.seeds.size();
  std::size_t workers = config.threads != 0 ? config.threads : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, n);
  std::vector<SeedSummary> out(n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = run_seed(config.seeds[i]);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

std::filesystem::path write_summary(const RunConfig& config, const std::vector<SeedSummary>& seeds) {
  Json list = Json::array();
  for (const auto& s : seeds) list.push_back(to_json(s));
  const auto path = config.out_dir / (std::string(to_string(config.variant)) + "_summary.json");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << Json{{"config", to_json(config)}, {"seeds", list}}.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
  return path;
}

void prepare_out_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + config.out_dir.string() + ": " + ec.message());
}

}  // namespace

std::unique_ptr<DiscreteEnvironment> make_discrete_env(const EnvConfig& env, std::uint64_t seed) {
  switch (env.kind) {
    case EnvKind::cliff_walking:
      return std::make_unique<CliffWalking>(env.max_steps);
    case EnvKind::frozen_lake:
      return std::make_unique<FrozenLake>(env.slippery, seed, env.max_steps == 0 ? 100 : env.max_steps);
    case EnvKind::generated_mdp: {
      auto tables = make_random_mdp(env.n_states, env.n_actions,
                                    RewardDistribution::normal(env.reward_mean, env.reward_std),
                                    derive_seed(env.mdp_seed, 0));
      const std::size_t horizon = env.max_steps == 0 ? env.horizon : env.max_steps;
      return std::make_unique<GeneratedMdp>(std::move(tables), horizon, seed);
    }
    case EnvKind::pendulum:
      break;
  }
  throw Error(ErrorCode::invalid_config, std::string(to_string(env.kind)) + " is not a discrete-state environment");
}

std::unique_ptr<ContinuousEnvironment> make_continuous_env(const EnvConfig& env, std::uint64_t seed) {
  if (env.kind != EnvKind::pendulum) {
    throw Error(ErrorCode::invalid_config, std::string(to_string(env.kind)) + " is not a continuous-state environment");
  }
  CartPoleParams params;
  if (env.max_steps != 0) params.max_steps = env.max_steps;
  return std::make_unique<Pendulum>(env.granularity, seed, params);
}

TabularTrainer::TabularTrainer(DiscreteEnvironment& env, TabularAgent& agent, bool record_timing)
    : env_(&env), agent_(&agent), record_timing_(record_timing) {
  if (env.n_states() != agent.n_states() || env.n_actions() != agent.n_actions()) {
    throw Error(ErrorCode::shape_mismatch, "environment does not match the agent's table");
  }
}

MetricsRecord TabularTrainer::step() {
  if (!active_) {
    state_ = env_->reset();
    active_ = true;
    pending_.reset();
  }
  MetricsRecord rec;
  rec.step = step_;
  rec.episode = episode_;

  const auto t0 = Clock::now();
  Selection sel;
  if (pending_) {
    sel = std::move(*pending_);
    pending_.reset();
    rec.epsilon = pending_epsilon_;
  } else {
    rec.epsilon = agent_->epsilon(state_);
    sel = agent_->act(state_);
  }
  const auto t1 = Clock::now();

  const std::size_t n = agent_->n_actions();
  const bool stochastic = agent_->config().maximization == Maximization::stochastic;
  std::vector<double> row(n);
  for (std::size_t a = 0; a < n; ++a) row[a] = agent_->value(state_, ActionId{a});
  const CandidateSet& c = stochastic ? sel.candidates : CandidateSet::all(n);
  rec.candidates = c.size();
  rec.beta = beta(row, c);
  rec.omega = omega(row, c);

  const auto t2 = Clock::now();
  const auto result = env_->step(sel.action);
  const auto t3 = Clock::now();

  const TabularTransition tr{state_, sel.action, result.reward, result.next_state, result.terminated};
  if (agent_->config().algorithm == TabularAlgorithm::sarsa) {
    if (result.terminated) {
      agent_->learn_sarsa(tr, ActionId{0});
    } else {
      const double eps = agent_->epsilon(result.next_state);
      Selection next = agent_->act(result.next_state);
      agent_->learn_sarsa(tr, next.action);
      if (!result.truncated) {
        pending_ = std::move(next);
        pending_epsilon_ = eps;
      }
    }
  } else {
    agent_->learn(tr);
  }
  const auto t4 = Clock::now();

  cumulative_reward_ += result.reward;
  rec.reward = result.reward;
  rec.cumulative_reward = cumulative_reward_;
  rec.selection_ns = elapsed_ns(t0, t1);
  rec.env_ns = elapsed_ns(t2, t3);
  rec.update_ns = elapsed_ns(t3, t4);
  if (record_timing_) rec.wall_time_ns = std::max<std::uint64_t>(1, elapsed_ns(t0, t4));

  state_ = result.next_state;
  ++step_;
  if (result.terminated || result.truncated) {
    active_ = false;
    ++episode_;
  }
  return rec;
}

double greedy_return(DiscreteEnvironment& env, const TabularAgent& agent, std::size_t episodes,
                     std::size_t max_steps) {
  if (episodes == 0) return 0.0;
  double total = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    std::size_t s = env.reset();
    for (std::size_t t = 0; t < max_steps; ++t) {
      const auto r = env.step(agent.greedy_action(s));
      total += r.reward;
      s = r.next_state;
      if (r.terminated || r.truncated) break;
    }
  }
  return total / static_cast<double>(episodes);
}

std::filesystem::path curve_file_name(Variant variant, std::uint64_t seed) {
  return std::string(to_string(variant)) + "_seed" + std::to_string(seed) + ".csv";
}

RunResult run_tabular(const RunConfig& config) {
  config.validate();
  if (is_deep(config.variant)) throw Error(ErrorCode::invalid_config, "run_tabular needs a tabular variant");
  prepare_out_dir(config);
  const TabularAgentConfig agent_config = config.tabular_agent();

  auto run_seed = [&](std::uint64_t seed) {
    auto env = make_discrete_env(config.env, derive_seed(seed, SeedStream::env));
    TabularAgent agent(env->n_states(), env->n_actions(), agent_config, seed);
    TabularTrainer trainer(*env, agent, config.record_timing);
    const auto path = config.out_dir / curve_file_name(config.variant, seed);
    CurveWriter writer(path);
    SummaryBuilder summary(config.steps, config.resolved_window());
    for (std::uint64_t t = 0; t < config.steps; ++t) {
      const MetricsRecord rec = trainer.step();
      writer.write(rec);
      summary.add(rec);
    }
    writer.close();
    SeedSummary s = summary.finish(seed, trainer.episodes());
    s.curve_file = path;
    auto eval_env = make_discrete_env(config.env, derive_seed(derive_seed(seed, SeedStream::env), 1));
    const bool deterministic = config.env.kind == EnvKind::cliff_walking ||
                               (config.env.kind == EnvKind::frozen_lake && !config.env.slippery);
    s.greedy_return = greedy_return(*eval_env, agent, deterministic ? 1 : config.eval_episodes);
    return s;
  };

  RunResult result;
  result.seeds = fan_out(config, run_seed);
  result.summary_file = write_summary(config, result.seeds);
  return result;
}

RunResult run_deep(const RunConfig& config) {
  config.validate();
  if (!is_deep(config.variant)) throw Error(ErrorCode::invalid_config, "run_deep needs a deep variant");
  prepare_out_dir(config);
  const DeepAgentConfig agent_config = config.deep_agent();

  auto run_seed = [&](std::uint64_t seed) {
    auto env = make_continuous_env(config.env, derive_seed(seed, SeedStream::env));
    DeepAgent agent(env->state_dim(), env->action_map(), agent_config, seed);
    const auto path = config.out_dir / curve_file_name(config.variant, seed);
    auto ckpt = path;
    ckpt.replace_extension(".ckpt.json");
    CurveWriter writer(path);
    SummaryBuilder summary(config.steps, config.resolved_window());
    for (std::uint64_t t = 0; t < config.steps; ++t) {
      const MetricsRecord rec = agent.train_step(*env);
      writer.write(rec);
      summary.add(rec);
      if (config.checkpoint_every != 0 && (t + 1) % config.checkpoint_every == 0) agent.save_checkpoint(ckpt);
    }
    writer.close();
    agent.save_checkpoint(ckpt);
    SeedSummary s = summary.finish(seed, agent.episodes());
    s.curve_file = path;
    s.checkpoint = ckpt;
    const auto& lengths = agent.episode_lengths();
    if (!lengths.empty()) {
      const std::size_t m = std::min<std::size_t>(50, lengths.size());
      double sum = 0.0;
      for (std::size_t i = lengths.size() - m; i < lengths.size(); ++i) sum += static_cast<double>(lengths[i]);
      s.tail_episode_length = sum / static_cast<double>(m);
    }
    return s;
  };

  RunResult result;
  result.seeds = fan_out(config, run_seed);
  result.summary_file = write_summary(config, result.seeds);
  return result;
}

Json to_json(const SeedSummary& s) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j{
      {"seed", s.seed},
      {"steps", s.steps},
      {"episodes", s.episodes},
      {"final_cumulative_reward", s.final_cumulative_reward},
      {"mean_window_reward", s.mean_window_reward},
      {"window", s.window},
      {"mean_step_ns", opt(s.mean_step_ns)},
      {"tail_omega", opt(s.tail_omega)},
      {"beta_valid", s.beta_valid},
      {"greedy_return", opt(s.greedy_return)},
      {"tail_episode_length", opt(s.tail_episode_length)},
      {"curve_file", s.curve_file.filename().string()},
  };
  j["checkpoint"] = s.checkpoint ? Json(s.checkpoint->filename().string()) : Json(nullptr);
  return j;
}

}  // namespace stochq
