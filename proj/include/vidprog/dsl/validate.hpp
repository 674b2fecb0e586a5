#pragma once

#include <string>
#include <vector>

#include "vidprog/core/error.hpp"
#include "vidprog/core/params.hpp"
#include "vidprog/core/state.hpp"
#include "vidprog/dsl/ast.hpp"

namespace vidprog::dsl {

struct Diagnostic {
  ErrorCode code;
  std::string identifier;
  std::string message;
  SourcePos pos;
};

struct ValidationResult {
  std::vector<Diagnostic> errors;
  bool ok() const noexcept { return errors.empty(); }
  // All messages joined, one per line.
  std::string summary() const;
};

// Every variable must name exactly one schema attribute or parameter, the
// two namespaces must be disjoint, update targets must be attributes, and the
// default block must assign every attribute.
ValidationResult validate(const Program& program, const StateSchema& schema,
                          const ParamVector& params);

}  // namespace vidprog::dsl
