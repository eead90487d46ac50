// stochq: command-line front end for training runs, the selection-time
// benchmark, analysis checks and curve summaries.
//
// Exit codes: 0 success, 2 configuration error, 3 failed analysis, 1 other.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stochq/analysis_report.hpp"
#include "stochq/bench.hpp"
#include "stochq/config.hpp"
#include "stochq/runner.hpp"
#include "stochq/summarize.hpp"

namespace {

using namespace stochq;

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAnalysisFailed = 3;

struct RunOverrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> variant;
  std::optional<std::uint64_t> steps;
  std::optional<std::size_t> k;
  std::optional<std::string> memory;
  std::optional<std::string> env;
  bool no_timing = false;
};

void add_run_options(CLI::App* cmd, RunOverrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration");
  cmd->add_option("--seed", o.seed, "Run a single seed instead of the configured list");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--variant", o.variant, "Agent variant, e.g. stoch-q or stoch-dqn");
  cmd->add_option("--steps", o.steps, "Training steps per seed");
  cmd->add_option("--k", o.k, "Random subset size (0: ceil(log2 n))");
  cmd->add_option("--memory", o.memory, "Action memory")->check(CLI::IsMember({"per-state", "global", "none"}));
  cmd->add_option("--env", o.env, "Environment kind")
      ->check(CLI::IsMember({"cliff-walking", "frozen-lake", "generated-mdp", "pendulum"}));
  cmd->add_flag("--no-timing", o.no_timing, "Omit wall times for byte-reproducible curves");
}

RunConfig build_run_config(const RunOverrides& o, bool deep) {
  RunConfig c;
  if (!o.config.empty()) {
    c = load_run_config(o.config);
  } else if (deep) {
    c.env.kind = EnvKind::pendulum;
    c.variant = Variant::stoch_dqn;
    c.steps = 50000;
    c.seeds = {0, 1, 2, 3, 4};
  } else {
    c.seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  }
  if (o.env) {
    Json j = to_json(c);
    j["env"]["kind"] = *o.env;
    c = run_config_from_json(j);
  }
  if (o.variant) c.variant = parse_variant(*o.variant);
  if (o.seed) c.seeds = {*o.seed};
  if (o.out) c.out_dir = *o.out;
  if (o.steps) c.steps = *o.steps;
  if (o.k) c.k = *o.k;
  if (o.memory) c.memory = parse_memory_mode(*o.memory);
  if (o.no_timing) c.record_timing = false;
  return c;
}

void print_run(const RunResult& r) {
  for (const auto& s : r.seeds) {
    std::cout << "seed " << s.seed << ": steps=" << s.steps << " episodes=" << s.episodes
              << " cumulative_reward=" << s.final_cumulative_reward << " window_reward=" << s.mean_window_reward;
    if (s.greedy_return) std::cout << " greedy_return=" << *s.greedy_return;
    if (s.tail_episode_length) std::cout << " tail_episode_length=" << *s.tail_episode_length;
    if (s.tail_omega) std::cout << " tail_omega=" << *s.tail_omega;
    std::cout << " -> " << s.curve_file.string() << '\n';
  }
  std::cout << "summary: " << r.summary_file.string() << '\n';
}

std::vector<std::filesystem::path> collect_curves(const std::vector<std::string>& inputs) {
  std::vector<std::filesystem::path> files;
  for (const auto& in : inputs) {
    const std::filesystem::path p(in);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        const auto& f = entry.path();
        if (f.extension() == ".csv" && f.stem().string().find("_seed") != std::string::npos) found.push_back(f);
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic maximization for value-based reinforcement learning"};
  app.require_subcommand(1);

  RunOverrides tab;
  auto* run_tab = app.add_subcommand("run-tabular", "Train a tabular agent and write curve files");
  add_run_options(run_tab, tab);

  RunOverrides deep;
  auto* run_deep_cmd = app.add_subcommand("run-deep", "Train a deep agent on the pendulum and write curve files");
  add_run_options(run_deep_cmd, deep);

  BenchConfig bench;
  std::string bench_out = "bench";
  auto* bench_cmd = app.add_subcommand("bench-stochmax", "Time exact vs stochastic action selection");
  bench_cmd->add_option("--n-list", bench.n_list, "Ascending action counts")->delimiter(',');
  bench_cmd->add_option("--repetitions", bench.repetitions, "Timed repetitions per point (>= 30)");
  bench_cmd->add_option("--k", bench.k, "Random subset size (0: ceil(log2 n))");
  bench_cmd->add_option("--seed", bench.seed, "Seed");
  bench_cmd->add_option("--out", bench_out, "Output directory");
  bench_cmd->add_flag("--train-steps", bench.train_steps, "Also time full training steps");

  std::string which;
  std::string params_text;
  std::string params_file;
  std::string analyze_out = "analysis";
  std::optional<std::uint64_t> analyze_seed;
  auto* analyze_cmd = app.add_subcommand("analyze", "Run a numerical check and write a pass/fail report");
  analyze_cmd->add_option("which", which, "lemma1 | uniform | contraction | qstar-convergence | hitting-time")
      ->required()
      ->check(CLI::IsMember({"lemma1", "uniform", "contraction", "qstar-convergence", "hitting-time"}));
  analyze_cmd->add_option("--params", params_text, "Parameter overrides as a JSON object");
  analyze_cmd->add_option("--config", params_file, "Parameter overrides from a JSON file");
  analyze_cmd->add_option("--seed", analyze_seed, "Seed override");
  analyze_cmd->add_option("--out", analyze_out, "Output directory");

  std::vector<std::string> inputs;
  std::size_t window = 0;
  std::string summary_out = "summary";
  auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate curve files across seeds");
  summarize_cmd->add_option("inputs", inputs, "Curve files or directories")->required();
  summarize_cmd->add_option("--window", window, "Smoothing window (0: 100 deep, 1000 tabular)");
  summarize_cmd->add_option("--out", summary_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (run_tab->parsed()) {
      print_run(run_tabular(build_run_config(tab, false)));
    } else if (run_deep_cmd->parsed()) {
      print_run(run_deep(build_run_config(deep, true)));
    } else if (bench_cmd->parsed()) {
      const BenchResult r = bench_stochmax(bench);
      std::filesystem::create_directories(bench_out);
      write_bench_csv(r, std::filesystem::path(bench_out) / "bench.csv");
      std::ofstream(std::filesystem::path(bench_out) / "bench.json") << to_json(r).dump(2) << '\n';
      for (const auto& row : r.rows) {
        std::cout << row.series << " n=" << row.n << " median_ns=" << row.ns.median << " iqr=[" << row.ns.q1 << ", "
                  << row.ns.q3 << "] max_calls=" << row.max_calls << '\n';
      }
      for (const auto& [name, slope] : r.slopes) std::cout << "slope " << name << " = " << slope << '\n';
    } else if (analyze_cmd->parsed()) {
      Json params = Json::object();
      try {
        if (!params_file.empty()) {
          std::ifstream in(params_file);
          if (!in) throw Error(ErrorCode::io, "cannot read " + params_file);
          params = Json::parse(in);
        }
        if (!params_text.empty()) params.update(Json::parse(params_text));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_config, std::string("analysis parameters: ") + e.what());
      }
      if (analyze_seed) {
        if (which == "qstar-convergence") params["seeds"] = {*analyze_seed};
        else params["seed"] = *analyze_seed;
      }
      const AnalysisReport report = run_analysis(which, params);
      const auto path = write_report(report, analyze_out);
      std::cout << (report.pass ? "PASS " : "FAIL ") << report.name << ' ' << report.details.dump() << '\n'
                << "report: " << path.string() << '\n';
      if (!report.pass) return kExitAnalysisFailed;
    } else if (summarize_cmd->parsed()) {
      const auto summaries = summarize(collect_curves(inputs), window);
      for (const auto& s : summaries) std::cout << to_json(s).dump() << '\n';
      for (const auto& p : write_summaries(summaries, summary_out)) std::cout << "wrote " << p.string() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return e.code() == ErrorCode::invalid_config ? kExitConfig : kExitOther;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return 0;
}
