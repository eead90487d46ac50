#include "stochq/analysis_report.hpp"

#include <fstream>

#include "stochq/analysis.hpp"
#include "stochq/envs.hpp"
#include "stochq/runner.hpp"

namespace stochq {

namespace {

template <class T>
T param(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("bad value for '") + key + "': " + e.what());
  }
}

Json estimate_json(const MeanEstimate& e) {
  return Json{{"mean", e.mean}, {"std", e.std_dev}, {"samples", e.samples}, {"standard_error", e.standard_error()}};
}

AnalysisReport lemma1(const Json& p) {
  require_known_keys(p, {"n", "k", "trials", "seed"}, "lemma1 params");
  const auto n = param<std::size_t>(p, "n", 256);
  const auto k = param<std::size_t>(p, "k", default_subset_size(n));
  const auto e = lemma1_probability(n, k, param<std::size_t>(p, "trials", 1000000), param<std::uint64_t>(p, "seed", 0));
  return {"lemma1", e.meets_bound && e.within_3_sigma,
          Json{{"n", e.n}, {"k", e.k}, {"trials", e.trials}, {"empirical", e.empirical}, {"expected", e.expected},
               {"sigma", e.sigma}, {"meets_bound", e.meets_bound}, {"within_3_sigma", e.within_3_sigma}}};
}

AnalysisReport uniform(const Json& p) {
  require_known_keys(p, {"n", "k", "q_star", "b", "trials", "seed"}, "uniform params");
  const auto n = param<std::size_t>(p, "n", 5000);
  const auto k = param<std::size_t>(p, "k", default_subset_size(n));
  const auto e = uniform_expected_max(n, k, param<double>(p, "q_star", 100.0), param<double>(p, "b", 100.0),
                                      param<std::size_t>(p, "trials", 10000), param<std::uint64_t>(p, "seed", 0));
  return {"uniform", e.pass,
          Json{{"n", n}, {"k", k}, {"observed", estimate_json(e.observed)}, {"predicted", e.predicted}}};
}

AnalysisReport contraction(const Json& p) {
  require_known_keys(p, {"n_states", "n_actions", "k", "gamma", "trials", "seed"}, "contraction params");
  const auto ns = param<std::size_t>(p, "n_states", 4);
  const auto na = param<std::size_t>(p, "n_actions", 6);
  const auto k = param<std::size_t>(p, "k", default_subset_size(na));
  const auto gamma = param<double>(p, "gamma", 0.95);
  const auto seed = param<std::uint64_t>(p, "seed", 0);
  PhiOperator phi(make_random_mdp(ns, na, RewardDistribution::uniform(0.0, 1.0), derive_seed(seed, 0)), gamma,
                  SubsetDistribution::uniform(k));
  const auto r = contraction_check(phi, param<std::size_t>(p, "trials", 1000), derive_seed(seed, 1));
  return {"contraction", r.pass(),
          Json{{"gamma", gamma}, {"k", k}, {"trials", r.trials}, {"max_ratio", r.max_ratio},
               {"violations", r.violations}}};
}

AnalysisReport qstar_convergence(const Json& p) {
  require_known_keys(p,
                     {"n_states", "n_actions", "k", "gamma", "epsilon", "steps", "horizon", "seeds", "mdp_seed",
                      "tolerance", "required"},
                     "qstar-convergence params");
  ConvergenceParams c;
  c.n_states = param(p, "n_states", c.n_states);
  c.n_actions = param(p, "n_actions", c.n_actions);
  c.k = param(p, "k", c.k);
  c.gamma = param(p, "gamma", c.gamma);
  c.epsilon = param(p, "epsilon", c.epsilon);
  c.steps = param(p, "steps", c.steps);
  c.horizon = param(p, "horizon", c.horizon);
  c.seeds = param(p, "seeds", c.seeds);
  c.mdp_seed = param(p, "mdp_seed", c.mdp_seed);
  c.tolerance = param(p, "tolerance", c.tolerance);
  c.required = param(p, "required", c.required);
  const auto study = qstar_convergence_study(c);
  return {"qstar-convergence", study.pass,
          Json{{"gamma", c.gamma}, {"k", c.k}, {"steps", c.steps}, {"tolerance", c.tolerance},
               {"sup_norm_distances", study.distances}, {"within_tolerance", study.within},
               {"required", c.required}}};
}

AnalysisReport hitting_time(const Json& p) {
  require_known_keys(p, {"n", "k", "runs", "budget", "after_hit", "seed"}, "hitting-time params");
  const auto n = param<std::size_t>(p, "n", 5000);
  const auto k = param<std::size_t>(p, "k", default_subset_size(n));
  const auto budget = param<std::size_t>(p, "budget", n);
  const auto s = hitting_time_study(n, k, param<std::size_t>(p, "runs", 1000), budget,
                                    param<std::size_t>(p, "after_hit", 100), param<std::uint64_t>(p, "seed", 0));
  const double limit = s.bound + 3.0 * s.hit_time.standard_error();
  const bool pass = s.hits == s.runs && s.persisted == s.runs && s.hit_time.mean <= limit;
  return {"hitting-time", pass,
          Json{{"n", n}, {"k", k}, {"runs", s.runs}, {"budget", budget}, {"hits", s.hits}, {"persisted", s.persisted},
               {"hit_time", estimate_json(s.hit_time)}, {"max_hit_time", s.max_hit_time}, {"bound", s.bound},
               {"limit", limit}}};
}

}  // namespace

ConvergenceStudy qstar_convergence_study(const ConvergenceParams& c) {
  if (c.seeds.empty()) throw Error(ErrorCode::invalid_params, "at least one seed is required");
  FiniteMdp mdp = make_random_mdp(c.n_states, c.n_actions, RewardDistribution::uniform(0.0, 1.0), c.mdp_seed);
  const PhiOperator phi(mdp, c.gamma, SubsetDistribution::uniform(c.k));
  ConvergenceStudy study{mdp, qstar_fixed_point(phi, 1e-10, 100000).q, {}, 0, false};

  TabularAgentConfig cfg;
  cfg.gamma = c.gamma;
  cfg.algorithm = TabularAlgorithm::q_learning;
  cfg.maximization = Maximization::stochastic;
  cfg.subset_size = c.k;
  cfg.memory = MemoryMode::none;
  cfg.fixed_epsilon = c.epsilon;
  for (std::uint64_t seed : c.seeds) {
    GeneratedMdp env(mdp, c.horizon, derive_seed(seed, SeedStream::env));
    TabularAgent agent(c.n_states, c.n_actions, cfg, seed);
    TabularTrainer trainer(env, agent, false);
    for (std::uint64_t t = 0; t < c.steps; ++t) trainer.step();
    const double d = sup_norm_distance(agent.table(), study.q_star);
    study.distances.push_back(d);
    if (d < c.tolerance) ++study.within;
  }
  study.pass = study.within >= c.required;
  return study;
}

AnalysisReport run_analysis(const std::string& which, const Json& params) {
  const Json p = params.is_null() ? Json::object() : params;
  if (which == "lemma1") return lemma1(p);
  if (which == "uniform") return uniform(p);
  if (which == "contraction") return contraction(p);
  if (which == "qstar-convergence") return qstar_convergence(p);
  if (which == "hitting-time") return hitting_time(p);
  throw Error(ErrorCode::invalid_config, "unknown analysis '" + which + "'");
}

std::filesystem::path write_report(const AnalysisReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + dir.string());
  const auto path = dir / ("analysis_" + report.name + ".json");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
  out << Json{{"analysis", report.name}, {"pass", report.pass}, {"details", report.details}}.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
  return path;
}

}  // namespace stochq
