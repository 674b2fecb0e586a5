#include "vidprog/core/error.hpp"

namespace vidprog {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::unknown_attribute: return "unknown-attribute";
    case ErrorCode::schema_mismatch: return "schema-mismatch";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::out_of_bounds: return "out-of-bounds";
    case ErrorCode::infeasible_config: return "infeasible-config";
    case ErrorCode::missing_object: return "missing-object";
    case ErrorCode::inconsistent_objects: return "inconsistent-objects";
    case ErrorCode::empty_mask: return "empty-mask";
    case ErrorCode::syntax: return "syntax";
    case ErrorCode::unresolved_variable: return "unresolved-variable";
    case ErrorCode::namespace_collision: return "namespace-collision";
    case ErrorCode::incomplete_default: return "incomplete-default";
    case ErrorCode::evaluation: return "evaluation";
    case ErrorCode::all_restarts_failed: return "all-restarts-failed";
    case ErrorCode::unsupported_env: return "unsupported-env";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::dataset_not_found: return "dataset-not-found";
  }
  return "unknown";
}

}  // namespace vidprog
