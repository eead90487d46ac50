#include "stochq/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "stochq/deep.hpp"
#include "stochq/envs.hpp"

namespace stochq {

namespace {

using Clock = std::chrono::steady_clock;

constexpr double kForceLimit = 3.0;

struct Samples {
  std::vector<double> ns;
  std::uint64_t max_calls = 0;
  double call_sum = 0.0;
  std::uint64_t ops = 0;
};

BenchRow make_row(const std::string& series, std::size_t n, Samples s) {
  BenchRow row;
  row.series = series;
  row.n = n;
  row.ns = timing_stats(std::move(s.ns));
  row.max_calls = s.max_calls;
  row.mean_calls = s.ops ? s.call_sum / static_cast<double>(s.ops) : 0.0;
  return row;
}

DeepAgentConfig agent_config(const BenchConfig& c, Maximization mode) {
  DeepAgentConfig cfg;
  cfg.maximization = mode;
  cfg.subset_size = c.k;
  cfg.hidden = c.hidden;
  cfg.track_exact_max = false;
  cfg.record_timing = false;
  return cfg;
}

Samples time_selection(const BenchConfig& c, std::size_t n, Maximization mode) {
  const DiscretizedActionMap map(1, n, -kForceLimit, kForceLimit);
  DeepAgent agent(4, map, agent_config(c, mode), c.seed);
  Rng rng(derive_seed(c.seed, SeedStream::env));
  std::uniform_real_distribution<double> coord(-0.2, 0.2);
  auto random_state = [&] {
    return std::vector<double>{coord(rng), coord(rng), coord(rng), coord(rng)};
  };
  // Fill the replay buffer so the action memory is populated as in training.
  for (std::size_t i = 0; i < agent.buffer().capacity(); ++i) {
    DeepTransition t;
    t.state = random_state();
    t.action = ActionId{uniform_index(rng, n)};
    t.action_features = map.features(t.action);
    t.next_state = random_state();
    agent.remember(std::move(t));
  }
  std::vector<std::vector<double>> states(64);
  for (auto& s : states) s = random_state();

  Samples out;
  std::size_t cursor = 0;
  for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
    std::uint64_t ops = 0;
    const auto start = Clock::now();
    std::uint64_t elapsed = 0;
    do {
      const std::uint64_t before = agent.counters().selection_calls;
      agent.select_action(states[cursor++ % states.size()], 0.0);
      const std::uint64_t calls = agent.counters().selection_calls - before;
      out.max_calls = std::max(out.max_calls, calls);
      out.call_sum += static_cast<double>(calls);
      ++out.ops;
      ++ops;
      elapsed = static_cast<std::uint64_t>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
    } while (elapsed < c.min_rep_ns);
    out.ns.push_back(static_cast<double>(elapsed) / static_cast<double>(ops));
  }
  return out;
}

Samples time_train_step(const BenchConfig& c, std::size_t n, Maximization mode) {
  Pendulum env(n, derive_seed(c.seed, SeedStream::env));
  DeepAgent agent(env.state_dim(), env.action_map(), agent_config(c, mode), c.seed);
  while (agent.buffer().size() < agent.batch_size()) agent.train_step(env);
  Samples out;
  for (std::size_t rep = 0; rep < c.repetitions; ++rep) {
    const auto before = agent.counters();
    const auto start = Clock::now();
    agent.train_step(env);
    const auto stop = Clock::now();
    const std::uint64_t calls = agent.counters().selection_calls - before.selection_calls +
                                agent.counters().target_calls - before.target_calls;
    out.max_calls = std::max(out.max_calls, calls);
    out.call_sum += static_cast<double>(calls);
    ++out.ops;
    out.ns.push_back(static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count()));
  }
  return out;
}

}  // namespace

void BenchConfig::validate() const {
  if (n_list.empty()) throw Error(ErrorCode::invalid_config, "n_list must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 2) throw Error(ErrorCode::invalid_config, "every n must be at least 2");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw Error(ErrorCode::invalid_config, "n_list must be ascending");
  }
  if (repetitions < 30) throw Error(ErrorCode::invalid_config, "at least 30 repetitions required");
  if (k != 0 && k > n_list.front()) throw Error(ErrorCode::invalid_config, "k exceeds the smallest n");
}

TimingStats timing_stats(std::vector<double> samples) {
  if (samples.empty()) throw Error(ErrorCode::invalid_params, "no timing samples");
  std::sort(samples.begin(), samples.end());
  auto quantile = [&](double p) {
    const double pos = p * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return samples[lo] + frac * (samples[hi] - samples[lo]);
  };
  return {quantile(0.5), quantile(0.25), quantile(0.75)};
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::invalid_params, "slope needs two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw Error(ErrorCode::invalid_params, "log-log slope needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw Error(ErrorCode::invalid_params, "slope needs distinct x values");
  return sxy / sxx;
}

BenchResult bench_stochmax(const BenchConfig& config) {
  config.validate();
  BenchResult result;
  std::vector<std::string> series = {kStochasticSelection, kExactSelection};
  if (config.train_steps) {
    series.push_back(kStochasticTrainStep);
    series.push_back(kExactTrainStep);
  }
  for (std::size_t n : config.n_list) {
    result.rows.push_back(make_row(kStochasticSelection, n, time_selection(config, n, Maximization::stochastic)));
    result.rows.push_back(make_row(kExactSelection, n, time_selection(config, n, Maximization::exact)));
    if (config.train_steps) {
      result.rows.push_back(make_row(kStochasticTrainStep, n, time_train_step(config, n, Maximization::stochastic)));
      result.rows.push_back(make_row(kExactTrainStep, n, time_train_step(config, n, Maximization::exact)));
    }
  }
  if (config.n_list.size() >= 2) {
    for (const auto& name : series) {
      std::vector<double> x, y;
      for (const auto& row : result.rows) {
        if (row.series != name) continue;
        x.push_back(static_cast<double>(row.n));
        y.push_back(row.ns.median);
      }
      result.slopes[name] = log_log_slope(x, y);
    }
  }
  return result;
}

void write_bench_csv(const BenchResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << "series,n,median_ns,q1_ns,q3_ns,max_calls,mean_calls\n";
  for (const auto& r : result.rows) {
    out << r.series << ',' << r.n << ',' << r.ns.median << ',' << r.ns.q1 << ',' << r.ns.q3 << ','
        << r.max_calls << ',' << r.mean_calls << '\n';
  }
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
}

Json to_json(const BenchResult& result) {
  Json rows = Json::array();
  for (const auto& r : result.rows) {
    rows.push_back(Json{{"series", r.series},
                        {"n", r.n},
                        {"median_ns", r.ns.median},
                        {"q1_ns", r.ns.q1},
                        {"q3_ns", r.ns.q3},
                        {"max_calls", r.max_calls},
                        {"mean_calls", r.mean_calls}});
  }
  Json slopes = Json::object();
  for (const auto& [name, slope] : result.slopes) slopes[name] = slope;
  return Json{{"rows", rows}, {"slopes", slopes}};
}

}  // namespace stochq
