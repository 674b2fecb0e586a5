#include "vidprog/dsl/interpreter.hpp"

#include <cmath>

namespace vidprog::dsl {

namespace {

double checked(double v, const Expr& node) {
  if (!std::isfinite(v)) throw EvalError(node.pos, "non-finite result");
  return v;
}

double apply(const Expr& e, double a, double b) {
  switch (e.fn) {
    case Function::sin: return std::sin(a);
    case Function::cos: return std::cos(a);
    case Function::tan: return std::tan(a);
    case Function::abs: return std::abs(a);
    case Function::sqrt:
      if (a < 0.0) throw EvalError(e.pos, "sqrt of negative value");
      return std::sqrt(a);
    case Function::sign: return a > 0.0 ? 1.0 : (a < 0.0 ? -1.0 : 0.0);
    case Function::min: return std::min(a, b);
    case Function::max: return std::max(a, b);
  }
  return 0.0;
}

template <typename Lookup>
double evaluate(const Expr& e, const Lookup& lookup) {
  switch (e.kind) {
    case Expr::Kind::literal:
      return checked(e.value, e);
    case Expr::Kind::variable:
      return checked(lookup(e), e);
    case Expr::Kind::negate:
      return -evaluate(e.args[0], lookup);
    case Expr::Kind::binary: {
      const double a = evaluate(e.args[0], lookup);
      const double b = evaluate(e.args[1], lookup);
      switch (e.op) {
        case BinaryOp::add: return checked(a + b, e);
        case BinaryOp::sub: return checked(a - b, e);
        case BinaryOp::mul: return checked(a * b, e);
        case BinaryOp::div:
          if (b == 0.0) throw EvalError(e.pos, "division by zero");
          return checked(a / b, e);
      }
      return 0.0;
    }
    case Expr::Kind::call: {
      const double a = evaluate(e.args[0], lookup);
      const double b = e.args.size() > 1 ? evaluate(e.args[1], lookup) : 0.0;
      return checked(apply(e, a, b), e);
    }
  }
  return 0.0;
}

template <typename Lookup>
bool evaluate(const Guard& g, const Lookup& lookup) {
  switch (g.kind) {
    case Guard::Kind::compare: {
      const double a = evaluate(g.operands[0], lookup);
      const double b = evaluate(g.operands[1], lookup);
      switch (g.cmp) {
        case CompareOp::lt: return a < b;
        case CompareOp::le: return a <= b;
        case CompareOp::gt: return a > b;
        case CompareOp::ge: return a >= b;
        case CompareOp::eq: return a == b;
        case CompareOp::ne: return a != b;
      }
      return false;
    }
    case Guard::Kind::conjunction:
      return evaluate(g.children[0], lookup) && evaluate(g.children[1], lookup);
    case Guard::Kind::disjunction:
      return evaluate(g.children[0], lookup) || evaluate(g.children[1], lookup);
    case Guard::Kind::negation:
      return !evaluate(g.children[0], lookup);
  }
  return false;
}

struct MapLookup {
  const Bindings& bindings;
  double operator()(const Expr& e) const {
    auto it = bindings.find(e.name);
    if (it == bindings.end()) throw EvalError(e.pos, "unbound variable '" + e.name + "'");
    return it->second;
  }
};

struct SlotLookup {
  std::span<const double> slots;
  double operator()(const Expr& e) const {
    if (e.slot < 0 || static_cast<std::size_t>(e.slot) >= slots.size()) {
      throw EvalError(e.pos, "unbound variable '" + e.name + "'");
    }
    return slots[static_cast<std::size_t>(e.slot)];
  }
};

void bind(Expr& e, const std::function<int(std::string_view)>& resolve) {
  if (e.kind == Expr::Kind::variable) e.slot = resolve(e.name);
  for (auto& a : e.args) bind(a, resolve);
}

void bind(Guard& g, const std::function<int(std::string_view)>& resolve) {
  for (auto& e : g.operands) bind(e, resolve);
  for (auto& c : g.children) bind(c, resolve);
}

}  // namespace

double eval(const Expr& expr, const Bindings& bindings) {
  return evaluate(expr, MapLookup{bindings});
}

bool eval(const Guard& guard, const Bindings& bindings) {
  return evaluate(guard, MapLookup{bindings});
}

Bindings execute(const Program& program, const Bindings& bindings) {
  const MapLookup lookup{bindings};
  Bindings out;
  for (const auto& rule : program.rules) {
    if (evaluate(rule.guard, lookup)) {
      for (const auto& u : rule.updates) out[u.target] = evaluate(u.value, lookup);
      break;
    }
  }
  for (const auto& u : program.defaults) {
    if (!out.contains(u.target)) out[u.target] = evaluate(u.value, lookup);
  }
  return out;
}

void bind_slots(Program& program, const std::function<int(std::string_view)>& resolve_variable,
                const std::function<int(std::string_view)>& resolve_target) {
  for (auto& r : program.rules) {
    bind(r.guard, resolve_variable);
    for (auto& u : r.updates) {
      bind(u.value, resolve_variable);
      u.slot = resolve_target(u.target);
    }
  }
  for (auto& u : program.defaults) {
    bind(u.value, resolve_variable);
    u.slot = resolve_target(u.target);
  }
}

double eval_slots(const Expr& expr, std::span<const double> slots) {
  return evaluate(expr, SlotLookup{slots});
}

bool eval_slots(const Guard& guard, std::span<const double> slots) {
  return evaluate(guard, SlotLookup{slots});
}

int matching_rule(const Program& program, std::span<const double> slots) {
  for (std::size_t i = 0; i < program.rules.size(); ++i) {
    if (evaluate(program.rules[i].guard, SlotLookup{slots})) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace vidprog::dsl
