#pragma once

// Named analysis runs with pass/fail verdicts, used by `stochq analyze`.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "stochq/mdp.hpp"
#include "stochq/serialization.hpp"
#include "stochq/tabular.hpp"

namespace stochq {

struct ConvergenceParams {
  std::size_t n_states = 3;
  std::size_t n_actions = 5;
  std::size_t k = 2;
  /// At 0.9 and above the z^-0.8 step size leaves a bias well over 0.05
  /// after 2e5 steps.
  double gamma = 0.8;
  double epsilon = 0.3;
  std::uint64_t steps = 200000;
  std::size_t horizon = 200;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::uint64_t mdp_seed = 7;
  double tolerance = 0.05;
  /// Seeds that must land within tolerance.
  std::size_t required = 9;
};

struct ConvergenceStudy {
  FiniteMdp mdp;
  QTable q_star;
  std::vector<double> distances;
  std::size_t within = 0;
  bool pass = false;
};

/// Memoryless stochastic Q-learning (uniform k-subsets, fixed epsilon,
/// alpha = z^-0.8) on a random MDP with U[0, 1] rewards, measured against
/// the enumerated fixed point of the random-subset Bellman operator.
ConvergenceStudy qstar_convergence_study(const ConvergenceParams& params);

struct AnalysisReport {
  std::string name;
  bool pass = false;
  Json details;
};

/// Known names: lemma1, uniform, contraction, qstar-convergence,
/// hitting-time. `params` overrides per-analysis defaults; unknown names or
/// keys throw invalid_config.
AnalysisReport run_analysis(const std::string& which, const Json& params);

/// Writes "analysis_<name>.json" into `dir` and returns its path.
std::filesystem::path write_report(const AnalysisReport& report, const std::filesystem::path& dir);

}  // namespace stochq
