#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "stochq/config.hpp"
#include "stochq/curve_file.hpp"
#include "stochq/runner.hpp"
#include "stochq/summarize.hpp"

using namespace stochq;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stochq_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int cli(const std::string& args) {
  const char* exe = std::getenv("STOCHQ_CLI");
  REQUIRE(exe != nullptr);
  const std::string cmd = std::string(exe) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

MetricsRecord record(std::uint64_t step, double reward) {
  MetricsRecord r;
  r.step = step;
  r.reward = reward;
  r.cumulative_reward = reward * static_cast<double>(step + 1);
  r.epsilon = 0.5;
  r.beta = 0.25;
  r.candidates = 3;
  return r;
}

}  // namespace

TEST_CASE("run config round-trips through JSON") {
  RunConfig c;
  c.env.kind = EnvKind::generated_mdp;
  c.env.n_actions = 64;
  c.variant = Variant::stoch_double_q;
  c.seeds = {3, 4};
  c.steps = 1234;
  c.k = 5;
  c.memory = MemoryMode::none;
  c.tabular.fixed_epsilon = 0.2;
  c.deep.hidden = {8};
  CHECK(run_config_from_json(to_json(c)) == c);
  CHECK(run_config_from_json(Json::object()) == RunConfig{});
}

TEST_CASE("run config rejects unknown keys and bad values") {
  auto code = [](const std::string& text) {
    try {
      run_config_from_json(Json::parse(text)).validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  CHECK(code(R"({"stepz": 10})") == ErrorCode::invalid_config);
  CHECK(code(R"({"env": {"kind": "lava"}})") == ErrorCode::invalid_config);
  CHECK(code(R"({"variant": "stoch-x"})") == ErrorCode::invalid_config);
  CHECK(code(R"({"steps": "many"})") == ErrorCode::invalid_config);
  CHECK(code(R"({"seeds": []})") == ErrorCode::invalid_config);
  CHECK(code(R"({"variant": "stoch-dqn"})") == ErrorCode::invalid_config);
  CHECK(code(R"({"env": {"kind": "pendulum"}, "variant": "stoch-q"})") == ErrorCode::invalid_config);
  CHECK(code(R"({"env": {"kind": "pendulum"}, "variant": "stoch-dqn"})") == ErrorCode::io);
  CHECK(code(R"({"tabular": {"gamma": 2}})") == ErrorCode::invalid_config);
}

TEST_CASE("variant names and defaults") {
  CHECK(parse_variant("stoch-q") == Variant::stoch_q);
  CHECK(to_string(Variant::stoch_ddqn) == "stoch-ddqn");
  CHECK(is_deep(Variant::dqn));
  CHECK_FALSE(is_deep(Variant::sarsa));
  CHECK(is_stochastic(Variant::stoch_sarsa));
  RunConfig c;
  CHECK(c.resolved_memory() == MemoryMode::per_state);
  CHECK(c.resolved_window() == 1000);
  c.variant = Variant::stoch_dqn;
  c.env.kind = EnvKind::pendulum;
  CHECK(c.resolved_memory() == MemoryMode::global);
  CHECK(c.resolved_window() == 100);
  c.variant = Variant::dqn;
  CHECK(c.resolved_memory() == MemoryMode::none);
}

TEST_CASE("curve rows round-trip exactly") {
  MetricsRecord r = record(7, 0.1);
  r.omega = 1.0 / 3.0;
  r.wall_time_ns = 1500;
  const std::string line = format_curve_row(r);
  const MetricsRecord back = parse_curve_row(line);
  CHECK(back.step == 7);
  CHECK(back.reward == 0.1);
  CHECK(back.cumulative_reward == r.cumulative_reward);
  CHECK(*back.omega == 1.0 / 3.0);
  CHECK(*back.wall_time_ns == 1500);
  CHECK(back.candidates == 3);

  MetricsRecord bare = record(0, -1.0);
  bare.beta.reset();
  const std::string empty_fields = format_curve_row(bare);
  CHECK(empty_fields == "0,0,-1,-1,0.5,,,,3");
  const MetricsRecord parsed = parse_curve_row(empty_fields);
  CHECK_FALSE(parsed.beta.has_value());
  CHECK_FALSE(parsed.omega.has_value());
  CHECK_FALSE(parsed.wall_time_ns.has_value());

  CHECK_THROWS_AS(parse_curve_row("1,2,3"), Error);
  CHECK_THROWS_AS(parse_curve_row("a,0,0,0,0,,,,1"), Error);
}

TEST_CASE("curve files are checked when read") {
  const fs::path dir = scratch("curves");
  {
    CurveWriter w(dir / "ok.csv");
    for (std::uint64_t t = 0; t < 5; ++t) w.write(record(t, 1.0));
    w.close();
  }
  CHECK(read_curve_file(dir / "ok.csv").size() == 5);
  CHECK(slurp(dir / "ok.csv").rfind(std::string(kCurveHeader) + "\n", 0) == 0);

  auto code = [&](const std::string& text) {
    write_text(dir / "bad.csv", text);
    try {
      read_curve_file(dir / "bad.csv");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::io;
  };
  const std::string header = std::string(kCurveHeader) + "\n";
  CHECK(code("step,reward\n0,1\n") == ErrorCode::malformed_file);
  CHECK(code(header + "0,0,1,1,0.5,,,,1\n0,0,1,2,0.5,,,,1\n") == ErrorCode::malformed_file);
  CHECK(code(header + "0,0,1,1,0.5,,,\n") == ErrorCode::malformed_file);
  CHECK(code(header + "0,0,1,1,0.5,,,,1\n1,0,1,2,0.5,,,,1\n") == ErrorCode::io);
  try {
    read_curve_file(dir / "missing.csv");
    FAIL("expected io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
}

TEST_CASE("window means and seed statistics") {
  CHECK(window_means({1, 2, 3, 4, 5}, 2) == std::vector<double>{1.0, 1.5, 2.5, 3.5, 4.5});
  CHECK(window_means({2, 4, 6}, 10) == std::vector<double>{2.0, 3.0, 4.0});
  const MeanStd one = mean_std({5.0});
  CHECK(one.mean == 5.0);
  CHECK(one.std_dev == 0.0);
  const MeanStd two = mean_std({1.0, 3.0});
  CHECK(two.mean == 2.0);
  CHECK(two.std_dev == doctest::Approx(std::sqrt(2.0)));
  CHECK(curve_group("runs/stoch-q_seed3.csv") == "stoch-q");
  CHECK(curve_group("other.csv") == "other");
}

TEST_CASE("summarize groups files by variant and averages seeds") {
  const fs::path dir = scratch("summarize");
  auto write_curve = [&](const std::string& name, std::vector<double> rewards) {
    CurveWriter w(dir / name);
    double cum = 0.0;
    for (std::size_t t = 0; t < rewards.size(); ++t) {
      MetricsRecord r;
      r.step = t;
      r.reward = rewards[t];
      cum += rewards[t];
      r.cumulative_reward = cum;
      w.write(r);
    }
    w.close();
  };
  write_curve("q_seed0.csv", {1, 1, 1, 1});
  write_curve("q_seed1.csv", {3, 3, 3});
  write_curve("stoch-q_seed0.csv", {0, 2, 4, 6});
  const auto out = summarize({dir / "q_seed0.csv", dir / "q_seed1.csv", dir / "stoch-q_seed0.csv"}, 2);
  REQUIRE(out.size() == 2);
  const auto& q = out[0].variant == "q" ? out[0] : out[1];
  const auto& s = out[0].variant == "q" ? out[1] : out[0];
  CHECK(q.files == 2);
  CHECK(q.final_cumulative_reward.mean == 6.5);
  CHECK(q.smoothed_reward == std::vector<double>{2.0, 2.0, 2.0});
  CHECK_FALSE(q.step_ns.has_value());
  CHECK(s.smoothed_reward == std::vector<double>{0.0, 1.0, 3.0, 5.0});
  const auto paths = write_summaries(out, dir / "summary");
  CHECK(fs::exists(dir / "summary" / "summary.csv"));
  CHECK(paths.size() == 3);

  write_text(dir / "empty_seed0.csv", std::string(kCurveHeader) + "\n");
  CHECK_THROWS_AS(summarize({dir / "empty_seed0.csv"}, 2), Error);
  CHECK_THROWS_AS(summarize({}, 2), Error);
}

TEST_CASE("tabular runs write one curve per seed and a summary") {
  const fs::path dir = scratch("run");
  RunConfig c;
  c.env.kind = EnvKind::cliff_walking;
  c.variant = Variant::stoch_q;
  c.seeds = {0, 1};
  c.steps = 2000;
  c.out_dir = dir;
  c.eval_episodes = 2;
  const RunResult r = run_tabular(c);
  REQUIRE(r.seeds.size() == 2);
  for (const auto& s : r.seeds) {
    CHECK(fs::exists(s.curve_file));
    CHECK(s.curve_file.filename() == curve_file_name(Variant::stoch_q, s.seed));
    const auto rows = read_curve_file(s.curve_file);
    CHECK(rows.size() == 2000);
    CHECK(rows.back().cumulative_reward == s.final_cumulative_reward);
    CHECK(s.beta_valid);
    for (const auto& row : rows) CHECK(row.candidates <= 4);
  }
  CHECK(fs::exists(dir / "stoch-q_summary.json"));
}

TEST_CASE("CLI exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(cli("") == 2);
  CHECK(cli("no-such-command") == 2);
  CHECK(cli("run-tabular --variant stoch-zzz --out " + dir.string()) == 2);
  write_text(dir / "bad.json", R"({"unknown_key": 1})");
  CHECK(cli("run-tabular --config " + (dir / "bad.json").string()) == 2);
  CHECK(cli("run-tabular --env frozen-lake --variant stoch-q --seed 1 --steps 500 --no-timing --out " +
            (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / "stoch-q_seed1.csv"));
  CHECK(cli("summarize " + (dir / "run").string() + " --window 10 --out " + (dir / "sum").string()) == 0);
  CHECK(fs::exists(dir / "sum" / "summary.csv"));
  CHECK(cli("summarize " + (dir / "nothing.csv").string()) == 1);
  CHECK(cli("analyze contraction --params '{\"trials\": 100}' --out " + (dir / "an").string()) == 0);
  CHECK(fs::exists(dir / "an" / "analysis_contraction.json"));
  CHECK(cli("analyze uniform --params '{\"n\": 100, \"k\": 3, \"trials\": 2000, \"q_star\": 100, \"b\": 100}' --out " +
            (dir / "an").string()) == 0);
  CHECK(cli("analyze lemma1 --params '{\"bogus\": 1}'") == 2);
  // A two-query budget cannot find the optimum among 5000 actions.
  CHECK(cli("analyze hitting-time --params '{\"runs\": 20, \"budget\": 2}' --out " + (dir / "an").string()) == 3);
}

TEST_CASE("runs without timing are byte-identical") {
  const fs::path a = scratch("repro_a");
  const fs::path b = scratch("repro_b");
  const std::string args = "run-tabular --env cliff-walking --variant stoch-sarsa --seed 3 --steps 3000 --no-timing --out ";
  REQUIRE(cli(args + a.string()) == 0);
  REQUIRE(cli(args + b.string()) == 0);
  CHECK(slurp(a / "stoch-sarsa_seed3.csv") == slurp(b / "stoch-sarsa_seed3.csv"));
  CHECK(slurp(a / "stoch-sarsa_seed3.csv").find(",,") != std::string::npos);
}

TEST_CASE("identical seed files summarize with zero spread") {
  const fs::path dir = scratch("identical");
  for (const char* name : {"sarsa_seed0.csv", "sarsa_seed1.csv"}) {
    CurveWriter w(dir / name);
    for (std::uint64_t t = 0; t < 10; ++t) {
      MetricsRecord r = record(t, static_cast<double>(t % 3));
      r.wall_time_ns = 100 + t;
      w.write(r);
    }
    w.close();
  }
  const auto out = summarize({dir / "sarsa_seed0.csv", dir / "sarsa_seed1.csv"}, 4);
  REQUIRE(out.size() == 1);
  CHECK(out[0].final_cumulative_reward.std_dev == 0.0);
  REQUIRE(out[0].step_ns.has_value());
  CHECK(out[0].step_ns->mean == 104.5);
  CHECK(out[0].step_ns->std_dev == 0.0);
  // Rewards 0,1,2,0,1,2,0,1,2,0 with a trailing window of 4.
  const std::vector<double> expected = {0.0, 0.5, 1.0, 0.75, 1.0, 1.25, 0.75, 1.0, 1.25, 0.75};
  CHECK(out[0].smoothed_reward == expected);
}

TEST_CASE("analysis reports pass for the documented examples") {
  const fs::path dir = scratch("analysis");
  CHECK(cli("analyze lemma1 --params '{\"n\": 256, \"k\": 8}' --out " + dir.string()) == 0);
  CHECK(cli("analyze contraction --params '{\"gamma\": 0.95, \"trials\": 1000}' --out " + dir.string()) == 0);
  const Json report = Json::parse(slurp(dir / "analysis_contraction.json"));
  CHECK(report.at("pass") == true);
  CHECK(report.at("details").at("max_ratio").get<double>() <= 0.95);
}
