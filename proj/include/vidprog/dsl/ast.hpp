#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace vidprog::dsl {

struct SourcePos {
  int line = 1;
  int column = 1;
};

std::string to_string(SourcePos pos);

enum class Function { sin, cos, tan, abs, sqrt, sign, min, max };
enum class BinaryOp { add, sub, mul, div };
enum class CompareOp { lt, le, gt, ge, eq, ne };

std::string_view to_string(Function fn);
std::string_view to_string(BinaryOp op);
std::string_view to_string(CompareOp op);
bool parse_function(std::string_view name, Function& out);
int arity(Function fn);

struct Expr {
  enum class Kind { literal, variable, negate, binary, call };

  Kind kind = Kind::literal;
  double value = 0.0;          // literal
  std::string name;            // variable
  BinaryOp op = BinaryOp::add;  // binary
  Function fn = Function::abs;  // call
  std::vector<Expr> args;      // negate: 1, binary: 2, call: arity
  SourcePos pos;
  int slot = -1;  // resolved variable index, see bind_slots

  static Expr literal(double v, SourcePos pos = {});
  static Expr variable(std::string name, SourcePos pos = {});
  static Expr negate(Expr operand, SourcePos pos = {});
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos = {});
  static Expr call(Function fn, std::vector<Expr> args, SourcePos pos = {});
};

struct Guard {
  enum class Kind { compare, conjunction, disjunction, negation };

  Kind kind = Kind::compare;
  CompareOp cmp = CompareOp::lt;
  std::vector<Expr> operands;   // compare: 2
  std::vector<Guard> children;  // conjunction/disjunction: 2, negation: 1
  SourcePos pos;
};

struct Update {
  std::string target;
  Expr value;
  SourcePos pos;
  int slot = -1;
};

struct Rule {
  Guard guard;
  std::vector<Update> updates;
  SourcePos pos;
};

// Guarded rules (first match wins) over a mandatory default block.
struct Program {
  std::vector<Rule> rules;
  std::vector<Update> defaults;
};

// Structural equality: ignores source positions and slot bindings.
bool same_structure(const Expr& a, const Expr& b);
bool same_structure(const Guard& a, const Guard& b);
bool same_structure(const Program& a, const Program& b);

// Free variable names in first-occurrence order.
std::vector<std::string> free_variables(const Program& program);

}  // namespace vidprog::dsl
