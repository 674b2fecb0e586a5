#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>

#include "vidprog/core/error.hpp"
#include "vidprog/dsl/ast.hpp"

namespace vidprog::dsl {

// Division by zero, sqrt of a negative, a non-finite intermediate, or an
// unbound variable. pos() is the offending node.
class EvalError : public Error {
 public:
  EvalError(SourcePos pos, const std::string& message)
      : Error(ErrorCode::evaluation, to_string(pos) + ": " + message), pos_(pos) {}

  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

using Bindings = std::map<std::string, double, std::less<>>;

double eval(const Expr& expr, const Bindings& bindings);
bool eval(const Guard& guard, const Bindings& bindings);

// One simultaneous step: every right-hand side sees the pre-update bindings.
// The first rule whose guard holds supplies its updates; the default block
// supplies the remaining targets. Returns target -> new value.
Bindings execute(const Program& program, const Bindings& bindings);

// Slot-resolved evaluation used by the transition engine. After bind_slots,
// every variable carries the index returned by `resolve` (or -1 if unknown)
// and every update carries the index of its target.
void bind_slots(Program& program, const std::function<int(std::string_view)>& resolve_variable,
                const std::function<int(std::string_view)>& resolve_target);

double eval_slots(const Expr& expr, std::span<const double> slots);
bool eval_slots(const Guard& guard, std::span<const double> slots);

// Index of the first rule whose guard holds, or -1 for the default block only.
int matching_rule(const Program& program, std::span<const double> slots);

}  // namespace vidprog::dsl
