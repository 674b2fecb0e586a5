#include "vidprog/dsl/ast.hpp"

#include <algorithm>

namespace vidprog::dsl {

std::string to_string(SourcePos pos) {
  return std::to_string(pos.line) + ":" + std::to_string(pos.column);
}

std::string_view to_string(Function fn) {
  switch (fn) {
    case Function::sin: return "sin";
    case Function::cos: return "cos";
    case Function::tan: return "tan";
    case Function::abs: return "abs";
    case Function::sqrt: return "sqrt";
    case Function::sign: return "sign";
    case Function::min: return "min";
    case Function::max: return "max";
  }
  return "?";
}

std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
  }
  return "?";
}

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::lt: return "<";
    case CompareOp::le: return "<=";
    case CompareOp::gt: return ">";
    case CompareOp::ge: return ">=";
    case CompareOp::eq: return "==";
    case CompareOp::ne: return "!=";
  }
  return "?";
}

bool parse_function(std::string_view name, Function& out) {
  for (auto fn : {Function::sin, Function::cos, Function::tan, Function::abs, Function::sqrt,
                  Function::sign, Function::min, Function::max}) {
    if (to_string(fn) == name) {
      out = fn;
      return true;
    }
  }
  return false;
}

int arity(Function fn) { return fn == Function::min || fn == Function::max ? 2 : 1; }

Expr Expr::literal(double v, SourcePos pos) {
  Expr e;
  e.kind = Kind::literal;
  e.value = v;
  e.pos = pos;
  return e;
}

Expr Expr::variable(std::string name, SourcePos pos) {
  Expr e;
  e.kind = Kind::variable;
  e.name = std::move(name);
  e.pos = pos;
  return e;
}

Expr Expr::negate(Expr operand, SourcePos pos) {
  Expr e;
  e.kind = Kind::negate;
  e.args.push_back(std::move(operand));
  e.pos = pos;
  return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos) {
  Expr e;
  e.kind = Kind::binary;
  e.op = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  e.pos = pos;
  return e;
}

Expr Expr::call(Function fn, std::vector<Expr> args, SourcePos pos) {
  Expr e;
  e.kind = Kind::call;
  e.fn = fn;
  e.args = std::move(args);
  e.pos = pos;
  return e;
}

bool same_structure(const Expr& a, const Expr& b) {
  if (a.kind != b.kind || a.args.size() != b.args.size()) return false;
  switch (a.kind) {
    case Expr::Kind::literal:
      if (a.value != b.value) return false;
      break;
    case Expr::Kind::variable:
      if (a.name != b.name) return false;
      break;
    case Expr::Kind::binary:
      if (a.op != b.op) return false;
      break;
    case Expr::Kind::call:
      if (a.fn != b.fn) return false;
      break;
    case Expr::Kind::negate:
      break;
  }
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (!same_structure(a.args[i], b.args[i])) return false;
  }
  return true;
}

bool same_structure(const Guard& a, const Guard& b) {
  if (a.kind != b.kind || a.operands.size() != b.operands.size() ||
      a.children.size() != b.children.size()) {
    return false;
  }
  if (a.kind == Guard::Kind::compare && a.cmp != b.cmp) return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i) {
    if (!same_structure(a.operands[i], b.operands[i])) return false;
  }
  for (std::size_t i = 0; i < a.children.size(); ++i) {
    if (!same_structure(a.children[i], b.children[i])) return false;
  }
  return true;
}

namespace {

bool same_updates(const std::vector<Update>& a, const std::vector<Update>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].target != b[i].target || !same_structure(a[i].value, b[i].value)) return false;
  }
  return true;
}

void collect(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::variable &&
      std::find(out.begin(), out.end(), e.name) == out.end()) {
    out.push_back(e.name);
  }
  for (const auto& a : e.args) collect(a, out);
}

void collect(const Guard& g, std::vector<std::string>& out) {
  for (const auto& e : g.operands) collect(e, out);
  for (const auto& c : g.children) collect(c, out);
}

}  // namespace

bool same_structure(const Program& a, const Program& b) {
  if (a.rules.size() != b.rules.size()) return false;
  for (std::size_t i = 0; i < a.rules.size(); ++i) {
    if (!same_structure(a.rules[i].guard, b.rules[i].guard) ||
        !same_updates(a.rules[i].updates, b.rules[i].updates)) {
      return false;
    }
  }
  return same_updates(a.defaults, b.defaults);
}

std::vector<std::string> free_variables(const Program& program) {
  std::vector<std::string> out;
  for (const auto& r : program.rules) {
    collect(r.guard, out);
    for (const auto& u : r.updates) collect(u.value, out);
  }
  for (const auto& u : program.defaults) collect(u.value, out);
  return out;
}

}  // namespace vidprog::dsl
