#include "stochq/config.hpp"

#include <array>
#include <fstream>
#include <utility>

namespace stochq {

namespace {

constexpr std::array<std::pair<EnvKind, std::string_view>, 4> kEnvNames = {{
    {EnvKind::cliff_walking, "cliff-walking"},
    {EnvKind::frozen_lake, "frozen-lake"},
    {EnvKind::generated_mdp, "generated-mdp"},
    {EnvKind::pendulum, "pendulum"},
}};

constexpr std::array<std::pair<Variant, std::string_view>, 10> kVariantNames = {{
    {Variant::q, "q"},
    {Variant::stoch_q, "stoch-q"},
    {Variant::double_q, "double-q"},
    {Variant::stoch_double_q, "stoch-double-q"},
    {Variant::sarsa, "sarsa"},
    {Variant::stoch_sarsa, "stoch-sarsa"},
    {Variant::dqn, "dqn"},
    {Variant::stoch_dqn, "stoch-dqn"},
    {Variant::ddqn, "ddqn"},
    {Variant::stoch_ddqn, "stoch-ddqn"},
}};

template <class T>
void read(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("bad value for '") + key + "': " + e.what());
  }
}

EnvKind parse_env_kind(std::string_view name) {
  for (const auto& [kind, text] : kEnvNames) {
    if (text == name) return kind;
  }
  throw Error(ErrorCode::invalid_config, "unknown environment '" + std::string(name) + "'");
}

Json env_to_json(const EnvConfig& e) {
  return Json{{"kind", to_string(e.kind)},       {"slippery", e.slippery},
              {"n_states", e.n_states},          {"n_actions", e.n_actions},
              {"reward_mean", e.reward_mean},    {"reward_std", e.reward_std},
              {"horizon", e.horizon},            {"mdp_seed", e.mdp_seed},
              {"granularity", e.granularity},    {"max_steps", e.max_steps}};
}

EnvConfig env_from_json(const Json& j) {
  require_known_keys(j,
                     {"kind", "slippery", "n_states", "n_actions", "reward_mean", "reward_std",
                      "horizon", "mdp_seed", "granularity", "max_steps"},
                     "env");
  EnvConfig e;
  std::string kind = std::string(to_string(e.kind));
  read(j, "kind", kind);
  e.kind = parse_env_kind(kind);
  read(j, "slippery", e.slippery);
  read(j, "n_states", e.n_states);
  read(j, "n_actions", e.n_actions);
  read(j, "reward_mean", e.reward_mean);
  read(j, "reward_std", e.reward_std);
  read(j, "horizon", e.horizon);
  read(j, "mdp_seed", e.mdp_seed);
  read(j, "granularity", e.granularity);
  read(j, "max_steps", e.max_steps);
  return e;
}

Json tabular_to_json(const TabularHyper& t) {
  Json j{{"gamma", t.gamma}, {"lr_exponent", t.lr_exponent}, {"memory_capacity", t.memory_capacity}};
  j["fixed_epsilon"] = t.fixed_epsilon ? Json(*t.fixed_epsilon) : Json(nullptr);
  return j;
}

TabularHyper tabular_from_json(const Json& j) {
  require_known_keys(j, {"gamma", "lr_exponent", "memory_capacity", "fixed_epsilon"}, "tabular");
  TabularHyper t;
  read(j, "gamma", t.gamma);
  read(j, "lr_exponent", t.lr_exponent);
  read(j, "memory_capacity", t.memory_capacity);
  if (j.contains("fixed_epsilon") && !j.at("fixed_epsilon").is_null()) {
    double eps = 0.0;
    read(j, "fixed_epsilon", eps);
    t.fixed_epsilon = eps;
  }
  return t;
}

Json deep_to_json(const DeepHyper& d) {
  return Json{{"gamma", d.gamma},
              {"learning_rate", d.learning_rate},
              {"epsilon_init", d.epsilon_init},
              {"epsilon_decay", d.epsilon_decay},
              {"epsilon_min", d.epsilon_min},
              {"tau", d.tau},
              {"hidden", d.hidden},
              {"track_exact_max", d.track_exact_max}};
}

DeepHyper deep_from_json(const Json& j) {
  require_known_keys(j,
                     {"gamma", "learning_rate", "epsilon_init", "epsilon_decay", "epsilon_min", "tau",
                      "hidden", "track_exact_max"},
                     "deep");
  DeepHyper d;
  read(j, "gamma", d.gamma);
  read(j, "learning_rate", d.learning_rate);
  read(j, "epsilon_init", d.epsilon_init);
  read(j, "epsilon_decay", d.epsilon_decay);
  read(j, "epsilon_min", d.epsilon_min);
  read(j, "tau", d.tau);
  read(j, "hidden", d.hidden);
  read(j, "track_exact_max", d.track_exact_max);
  return d;
}

}  // namespace

std::string_view to_string(EnvKind kind) {
  for (const auto& [k, text] : kEnvNames) {
    if (k == kind) return text;
  }
  return "unknown";
}

std::string_view to_string(Variant v) {
  for (const auto& [k, text] : kVariantNames) {
    if (k == v) return text;
  }
  return "unknown";
}

Variant parse_variant(std::string_view name) {
  for (const auto& [v, text] : kVariantNames) {
    if (text == name) return v;
  }
  throw Error(ErrorCode::invalid_config, "unknown variant '" + std::string(name) + "'");
}

bool is_deep(Variant v) noexcept {
  return v == Variant::dqn || v == Variant::stoch_dqn || v == Variant::ddqn || v == Variant::stoch_ddqn;
}

bool is_stochastic(Variant v) noexcept {
  return v == Variant::stoch_q || v == Variant::stoch_double_q || v == Variant::stoch_sarsa ||
         v == Variant::stoch_dqn || v == Variant::stoch_ddqn;
}

MemoryMode RunConfig::resolved_memory() const {
  if (memory) return *memory;
  if (!is_stochastic(variant)) return MemoryMode::none;
  return is_deep(variant) ? MemoryMode::global : MemoryMode::per_state;
}

std::size_t RunConfig::resolved_window() const {
  if (summary_window != 0) return summary_window;
  return is_deep(variant) ? 100 : 1000;
}

TabularAgentConfig RunConfig::tabular_agent() const {
  TabularAgentConfig c;
  c.gamma = tabular.gamma;
  c.lr_exponent = tabular.lr_exponent;
  switch (variant) {
    case Variant::double_q:
    case Variant::stoch_double_q: c.algorithm = TabularAlgorithm::double_q; break;
    case Variant::sarsa:
    case Variant::stoch_sarsa: c.algorithm = TabularAlgorithm::sarsa; break;
    default: c.algorithm = TabularAlgorithm::q_learning; break;
  }
  c.maximization = is_stochastic(variant) ? Maximization::stochastic : Maximization::exact;
  c.subset_size = k;
  c.memory = resolved_memory();
  c.memory_capacity = tabular.memory_capacity;
  c.fixed_epsilon = tabular.fixed_epsilon;
  return c;
}

DeepAgentConfig RunConfig::deep_agent() const {
  DeepAgentConfig c;
  c.gamma = deep.gamma;
  c.learning_rate = deep.learning_rate;
  c.epsilon_init = deep.epsilon_init;
  c.epsilon_decay = deep.epsilon_decay;
  c.epsilon_min = deep.epsilon_min;
  c.tau = deep.tau;
  c.algorithm = variant == Variant::ddqn || variant == Variant::stoch_ddqn ? DeepAlgorithm::ddqn
                                                                          : DeepAlgorithm::dqn;
  c.maximization = is_stochastic(variant) ? Maximization::stochastic : Maximization::exact;
  c.subset_size = k;
  c.memory = resolved_memory();
  c.hidden = deep.hidden;
  c.track_exact_max = deep.track_exact_max;
  c.record_timing = record_timing;
  return c;
}

void RunConfig::validate() const {
  if (seeds.empty()) throw Error(ErrorCode::invalid_config, "at least one seed is required");
  if (steps == 0) throw Error(ErrorCode::invalid_config, "steps must be positive");
  if (is_deep(variant) && env.discrete()) {
    throw Error(ErrorCode::invalid_config,
                std::string(to_string(variant)) + " needs a continuous-state environment");
  }
  if (!is_deep(variant) && !env.discrete()) {
    throw Error(ErrorCode::invalid_config,
                std::string(to_string(variant)) + " needs a discrete-state environment");
  }
  if (env.kind == EnvKind::generated_mdp && (env.n_states == 0 || env.n_actions == 0 || env.horizon == 0)) {
    throw Error(ErrorCode::invalid_config, "generated MDP sizes and horizon must be positive");
  }
  if (env.kind == EnvKind::pendulum && env.granularity < 2) {
    throw Error(ErrorCode::invalid_config, "pendulum granularity must be at least 2");
  }
  const MemoryMode m = resolved_memory();
  if (is_deep(variant) && m == MemoryMode::per_state) {
    throw Error(ErrorCode::invalid_config, "deep variants support memory 'global' or 'none'");
  }
  if (!is_deep(variant) && m == MemoryMode::global) {
    throw Error(ErrorCode::invalid_config, "tabular variants support memory 'per-state' or 'none'");
  }
  if (is_deep(variant)) {
    deep_agent().validate();
  } else {
    tabular_agent().validate();
  }
}

Json to_json(const RunConfig& c) {
  Json seeds = Json::array();
  for (auto s : c.seeds) seeds.push_back(s);
  Json j{
      {"env", env_to_json(c.env)},
      {"variant", to_string(c.variant)},
      {"seeds", seeds},
      {"steps", c.steps},
      {"k", c.k},
      {"out_dir", c.out_dir.string()},
      {"record_timing", c.record_timing},
      {"threads", c.threads},
      {"checkpoint_every", c.checkpoint_every},
      {"eval_episodes", c.eval_episodes},
      {"summary_window", c.summary_window},
      {"tabular", tabular_to_json(c.tabular)},
      {"deep", deep_to_json(c.deep)},
  };
  j["memory"] = c.memory ? Json(to_string(*c.memory)) : Json(nullptr);
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  require_known_keys(j,
                     {"env", "variant", "seeds", "steps", "k", "memory", "out_dir", "record_timing",
                      "threads", "checkpoint_every", "eval_episodes", "summary_window", "tabular",
                      "deep"},
                     "run config");
  RunConfig c;
  if (j.contains("env")) c.env = env_from_json(j.at("env"));
  if (j.contains("variant")) {
    std::string v;
    read(j, "variant", v);
    c.variant = parse_variant(v);
  }
  read(j, "seeds", c.seeds);
  read(j, "steps", c.steps);
  read(j, "k", c.k);
  if (j.contains("memory") && !j.at("memory").is_null()) {
    std::string m;
    read(j, "memory", m);
    c.memory = parse_memory_mode(m);
  }
  if (j.contains("out_dir")) {
    std::string out;
    read(j, "out_dir", out);
    c.out_dir = out;
  }
  read(j, "record_timing", c.record_timing);
  read(j, "threads", c.threads);
  read(j, "checkpoint_every", c.checkpoint_every);
  read(j, "eval_episodes", c.eval_episodes);
  read(j, "summary_window", c.summary_window);
  if (j.contains("tabular")) c.tabular = tabular_from_json(j.at("tabular"));
  if (j.contains("deep")) c.deep = deep_from_json(j.at("deep"));
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot read config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

}  // namespace stochq
