#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stochq {

enum class ErrorCode {
  invalid_config,
  empty_candidates,
  invalid_spec,
  invalid_granularity,
  index_out_of_range,
  shape_mismatch,
  enumeration_too_large,
  non_convergence,
  invalid_params,
  malformed_file,
  env_state,
  io,
};

std::string_view to_string(ErrorCode code);

/// Library error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace stochq
