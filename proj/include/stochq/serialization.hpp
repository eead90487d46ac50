#pragma once

// JSON mapping for configuration types shared by checkpoints and run
// configs. Unknown keys are rejected with invalid_config.

#include <initializer_list>
#include <string>
#include <string_view>

#include "json.hpp"
#include "stochq/deep.hpp"
#include "stochq/mlp.hpp"
#include "stochq/stochmax.hpp"
#include "stochq/tabular.hpp"

namespace stochq {

using Json = nlohmann::json;

std::string_view to_string(MemoryMode mode);
std::string_view to_string(Maximization mode);
std::string_view to_string(DeepAlgorithm algorithm);
std::string_view to_string(TabularAlgorithm algorithm);

MemoryMode parse_memory_mode(std::string_view text);

/// Throws invalid_config when `object` is not an object or has a key
/// outside `allowed`.
void require_known_keys(const Json& object, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

Json to_json(const DeepAgentConfig& config);
DeepAgentConfig deep_config_from_json(const Json& j);

Json to_json(const MlpParams& params);
MlpParams mlp_params_from_json(const Json& j);

}  // namespace stochq
