#include "stochq/errors.hpp"

namespace stochq {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::empty_candidates: return "empty-candidates";
    case ErrorCode::invalid_spec: return "invalid-spec";
    case ErrorCode::invalid_granularity: return "invalid-granularity";
    case ErrorCode::index_out_of_range: return "index-out-of-range";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::enumeration_too_large: return "enumeration-too-large";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::invalid_params: return "invalid-params";
    case ErrorCode::malformed_file: return "malformed-file";
    case ErrorCode::env_state: return "env-state";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace stochq
