#include "stochq/serialization.hpp"

#include <algorithm>

namespace stochq {

std::string_view to_string(MemoryMode mode) {
  switch (mode) {
    case MemoryMode::per_state: return "per-state";
    case MemoryMode::global: return "global";
    case MemoryMode::none: return "none";
  }
  return "none";
}

std::string_view to_string(Maximization mode) {
  return mode == Maximization::stochastic ? "stochastic" : "exact";
}

std::string_view to_string(DeepAlgorithm algorithm) {
  return algorithm == DeepAlgorithm::dqn ? "dqn" : "ddqn";
}

std::string_view to_string(TabularAlgorithm algorithm) {
  switch (algorithm) {
    case TabularAlgorithm::q_learning: return "q";
    case TabularAlgorithm::double_q: return "double-q";
    case TabularAlgorithm::sarsa: return "sarsa";
  }
  return "q";
}

MemoryMode parse_memory_mode(std::string_view text) {
  if (text == "per-state") return MemoryMode::per_state;
  if (text == "global") return MemoryMode::global;
  if (text == "none") return MemoryMode::none;
  throw Error(ErrorCode::invalid_config, "unknown memory mode '" + std::string(text) + "'");
}

void require_known_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                        std::string_view context) {
  if (!object.is_object()) {
    throw Error(ErrorCode::invalid_config, std::string(context) + " must be a JSON object");
  }
  for (const auto& item : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw Error(ErrorCode::invalid_config,
                  "unknown key '" + item.key() + "' in " + std::string(context));
    }
  }
}

namespace {

template <class T>
void read_if(const Json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const DeepAgentConfig& c) {
  return Json{
      {"gamma", c.gamma},
      {"learning_rate", c.learning_rate},
      {"epsilon_init", c.epsilon_init},
      {"epsilon_decay", c.epsilon_decay},
      {"epsilon_min", c.epsilon_min},
      {"tau", c.tau},
      {"algorithm", to_string(c.algorithm)},
      {"maximization", to_string(c.maximization)},
      {"subset_size", c.subset_size},
      {"memory", to_string(c.memory)},
      {"hidden", c.hidden},
      {"track_exact_max", c.track_exact_max},
      {"record_timing", c.record_timing},
  };
}

DeepAgentConfig deep_config_from_json(const Json& j) {
  require_known_keys(j,
                     {"gamma", "learning_rate", "epsilon_init", "epsilon_decay", "epsilon_min", "tau",
                      "algorithm", "maximization", "subset_size", "memory", "hidden",
                      "track_exact_max", "record_timing"},
                     "deep agent config");
  DeepAgentConfig c;
  read_if(j, "gamma", c.gamma);
  read_if(j, "learning_rate", c.learning_rate);
  read_if(j, "epsilon_init", c.epsilon_init);
  read_if(j, "epsilon_decay", c.epsilon_decay);
  read_if(j, "epsilon_min", c.epsilon_min);
  read_if(j, "tau", c.tau);
  read_if(j, "subset_size", c.subset_size);
  read_if(j, "hidden", c.hidden);
  read_if(j, "track_exact_max", c.track_exact_max);
  read_if(j, "record_timing", c.record_timing);
  std::string text;
  if (j.contains("algorithm")) {
    read_if(j, "algorithm", text);
    if (text == "dqn") c.algorithm = DeepAlgorithm::dqn;
    else if (text == "ddqn") c.algorithm = DeepAlgorithm::ddqn;
    else throw Error(ErrorCode::invalid_config, "unknown deep algorithm '" + text + "'");
  }
  if (j.contains("maximization")) {
    read_if(j, "maximization", text);
    if (text == "stochastic") c.maximization = Maximization::stochastic;
    else if (text == "exact") c.maximization = Maximization::exact;
    else throw Error(ErrorCode::invalid_config, "unknown maximization '" + text + "'");
  }
  if (j.contains("memory")) {
    read_if(j, "memory", text);
    c.memory = parse_memory_mode(text);
  }
  return c;
}

Json to_json(const MlpParams& params) {
  const auto values = params.parameters();
  return Json{{"layer_sizes", params.layer_sizes()},
              {"parameters", std::vector<double>(values.begin(), values.end())}};
}

MlpParams mlp_params_from_json(const Json& j) {
  try {
    MlpParams p(j.at("layer_sizes").get<std::vector<std::size_t>>());
    const auto values = j.at("parameters").get<std::vector<double>>();
    if (values.size() != p.parameter_count()) {
      throw Error(ErrorCode::malformed_file, "parameter count does not match layer sizes");
    }
    std::copy(values.begin(), values.end(), p.parameters().begin());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::malformed_file, std::string("network parameters: ") + e.what());
  }
}

}  // namespace stochq
