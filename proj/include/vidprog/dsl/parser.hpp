#pragma once

#include <string_view>

#include "vidprog/core/error.hpp"
#include "vidprog/dsl/ast.hpp"

namespace vidprog::dsl {

// Positioned diagnostic for malformed source text (code() == syntax).
class ParseError : public Error {
 public:
  ParseError(SourcePos pos, const std::string& message)
      : Error(ErrorCode::syntax, to_string(pos) + ": " + message), pos_(pos), detail_(message) {}

  SourcePos pos() const noexcept { return pos_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  SourcePos pos_;
  std::string detail_;
};

// Grammar:
//   program  := rule* default_block
//   rule     := "when" guard ":" updates
//   default_block := "default" ":" updates
//   updates  := (ident "<-" expr ";")+
//   expr     := term (("+"|"-") term)*
//   term     := factor (("*"|"/") factor)*
//   factor   := "-"? atom
//   atom     := number | ident | fn "(" expr ("," expr)? ")" | "(" expr ")"
//   guard    := clause (("and"|"or") clause)*    -- "and" binds tighter
//   clause   := "not"? (comparison | "(" guard ")")
// '#' starts a comment that runs to end of line.
Program parse(std::string_view source);
Expr parse_expression(std::string_view source);
Guard parse_guard(std::string_view source);

// Maximum nesting of parentheses/negations before a diagnostic is raised.
inline constexpr int kMaxNesting = 200;

}  // namespace vidprog::dsl
