#pragma once

#include <string>

#include "vidprog/dsl/ast.hpp"

namespace vidprog::dsl {

// Minimal-parenthesis rendering; parse(print(p)) is structurally equal to p
// for any parsed p. Literals use the shortest round-trip decimal form.
std::string print(const Expr& expr);
std::string print(const Guard& guard);
std::string print(const Program& program);

std::string format_number(double value);

}  // namespace vidprog::dsl
