#include "vidprog/dsl/printer.hpp"

#include <charconv>
#include <cmath>

namespace vidprog::dsl {

namespace {

int precedence(const Expr& e) {
  if (e.kind == Expr::Kind::binary) {
    return e.op == BinaryOp::add || e.op == BinaryOp::sub ? 1 : 2;
  }
  if (e.kind == Expr::Kind::literal && std::signbit(e.value)) return 0;
  return 3;
}

void emit(const Expr& e, std::string& out);

void emit_wrapped(const Expr& e, bool wrap, std::string& out) {
  if (wrap) out += '(';
  emit(e, out);
  if (wrap) out += ')';
}

void emit(const Expr& e, std::string& out) {
  switch (e.kind) {
    case Expr::Kind::literal:
      if (std::signbit(e.value)) {
        out += "-";
        out += format_number(-e.value);
      } else {
        out += format_number(e.value);
      }
      return;
    case Expr::Kind::variable:
      out += e.name;
      return;
    case Expr::Kind::negate: {
      const Expr& inner = e.args[0];
      out += '-';
      const bool atomic = inner.kind == Expr::Kind::variable || inner.kind == Expr::Kind::call ||
                          (inner.kind == Expr::Kind::literal && !std::signbit(inner.value));
      emit_wrapped(inner, !atomic, out);
      return;
    }
    case Expr::Kind::binary: {
      const int p = precedence(e);
      emit_wrapped(e.args[0], precedence(e.args[0]) < p, out);
      out += ' ';
      out += to_string(e.op);
      out += ' ';
      emit_wrapped(e.args[1], precedence(e.args[1]) <= p, out);
      return;
    }
    case Expr::Kind::call:
      out += to_string(e.fn);
      out += '(';
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i > 0) out += ", ";
        emit(e.args[i], out);
      }
      out += ')';
      return;
  }
}

int precedence(const Guard& g) {
  switch (g.kind) {
    case Guard::Kind::disjunction: return 1;
    case Guard::Kind::conjunction: return 2;
    default: return 3;
  }
}

void emit(const Guard& g, std::string& out);

void emit_wrapped(const Guard& g, bool wrap, std::string& out) {
  if (wrap) out += '(';
  emit(g, out);
  if (wrap) out += ')';
}

void emit(const Guard& g, std::string& out) {
  switch (g.kind) {
    case Guard::Kind::compare:
      emit(g.operands[0], out);
      out += ' ';
      out += to_string(g.cmp);
      out += ' ';
      emit(g.operands[1], out);
      return;
    case Guard::Kind::negation:
      out += "not ";
      emit_wrapped(g.children[0], g.children[0].kind != Guard::Kind::compare, out);
      return;
    case Guard::Kind::conjunction:
    case Guard::Kind::disjunction: {
      const int p = precedence(g);
      emit_wrapped(g.children[0], precedence(g.children[0]) < p, out);
      out += g.kind == Guard::Kind::conjunction ? " and " : " or ";
      emit_wrapped(g.children[1], precedence(g.children[1]) <= p, out);
      return;
    }
  }
}

void emit_updates(const std::vector<Update>& updates, std::string& out) {
  for (const auto& u : updates) {
    out += "  ";
    out += u.target;
    out += " <- ";
    emit(u.value, out);
    out += ";\n";
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  std::string s(buf, ptr);
  return s;
}

std::string print(const Expr& expr) {
  std::string out;
  emit(expr, out);
  return out;
}

std::string print(const Guard& guard) {
  std::string out;
  emit(guard, out);
  return out;
}

std::string print(const Program& program) {
  std::string out;
  for (const auto& r : program.rules) {
    out += "when ";
    emit(r.guard, out);
    out += ":\n";
    emit_updates(r.updates, out);
  }
  out += "default:\n";
  emit_updates(program.defaults, out);
  return out;
}

}  // namespace vidprog::dsl
