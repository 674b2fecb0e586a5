#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vidprog {

enum class ErrorCode {
  invalid_argument,
  precondition,
  unknown_attribute,
  schema_mismatch,
  shape_mismatch,
  out_of_bounds,
  infeasible_config,
  missing_object,
  inconsistent_objects,
  empty_mask,
  syntax,
  unresolved_variable,
  namespace_collision,
  incomplete_default,
  evaluation,
  all_restarts_failed,
  unsupported_env,
  config,
  io,
  dataset_not_found,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace vidprog
