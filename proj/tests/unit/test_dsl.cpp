#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "vidprog/core/rng.hpp"
#include "vidprog/core/schemas.hpp"
#include "vidprog/dsl/interpreter.hpp"
#include "vidprog/dsl/parser.hpp"
#include "vidprog/dsl/printer.hpp"
#include "vidprog/dsl/validate.hpp"

using namespace vidprog;
using namespace vidprog::dsl;

namespace {

SourcePos syntax_error_pos(std::string_view src) {
  try {
    parse(src);
  } catch (const ParseError& e) {
    return e.pos();
  }
  FAIL("expected a syntax error for: " << src);
  return {};
}

// Random well-formed trees for the print/parse round-trip property.
Expr random_expr(SplitMix64& rng, int depth) {
  static const char* names[] = {"x", "vx", "g", "theta"};
  const int pick = depth <= 0 ? rng.uniform_int(0, 1) : rng.uniform_int(0, 4);
  switch (pick) {
    case 0: return Expr::literal(std::round(rng.uniform(0, 100)) / rng.uniform_int(1, 16));
    case 1: return Expr::variable(names[rng.uniform_int(0, 3)]);
    case 2: return Expr::negate(random_expr(rng, depth - 1));
    case 3:
      return Expr::binary(static_cast<BinaryOp>(rng.uniform_int(0, 3)),
                          random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    default: {
      const auto fn = static_cast<Function>(rng.uniform_int(0, 7));
      std::vector<Expr> args;
      for (int i = 0; i < arity(fn); ++i) args.push_back(random_expr(rng, depth - 1));
      return Expr::call(fn, std::move(args));
    }
  }
}

Guard random_guard(SplitMix64& rng, int depth) {
  Guard g;
  const int pick = depth <= 0 ? 0 : rng.uniform_int(0, 3);
  if (pick == 0) {
    g.kind = Guard::Kind::compare;
    g.cmp = static_cast<CompareOp>(rng.uniform_int(0, 5));
    g.operands.push_back(random_expr(rng, 2));
    g.operands.push_back(random_expr(rng, 2));
  } else if (pick == 3) {
    g.kind = Guard::Kind::negation;
    g.children.push_back(random_guard(rng, depth - 1));
  } else {
    g.kind = pick == 1 ? Guard::Kind::conjunction : Guard::Kind::disjunction;
    g.children.push_back(random_guard(rng, depth - 1));
    g.children.push_back(random_guard(rng, depth - 1));
  }
  return g;
}

}  // namespace

TEST_CASE("inertia program parses into two default updates") {
  const Program p = parse("default: x <- x + vx; vx <- vx;");
  CHECK(p.rules.empty());
  REQUIRE(p.defaults.size() == 2);
  CHECK(p.defaults[0].target == "x");
  CHECK(p.defaults[1].target == "vx");
}

TEST_CASE("precedence and associativity") {
  CHECK(same_structure(parse_expression("a + b * c"),
                       Expr::binary(BinaryOp::add, Expr::variable("a"),
                                    Expr::binary(BinaryOp::mul, Expr::variable("b"),
                                                 Expr::variable("c")))));
  CHECK(same_structure(parse_expression("a - b - c"),
                       Expr::binary(BinaryOp::sub,
                                    Expr::binary(BinaryOp::sub, Expr::variable("a"),
                                                 Expr::variable("b")),
                                    Expr::variable("c"))));
  CHECK(same_structure(parse_expression("-x * y"),
                       Expr::binary(BinaryOp::mul, Expr::negate(Expr::variable("x")),
                                    Expr::variable("y"))));
  const Program p = parse("default: x <- a + b * c;");
  CHECK(same_structure(p.defaults[0].value, parse_expression("a + (b * c)")));
  const Guard g = parse_guard("a < 1 or b < 2 and c < 3");
  CHECK(g.kind == Guard::Kind::disjunction);
  CHECK(g.children[1].kind == Guard::Kind::conjunction);
}

TEST_CASE("parenthesized guards and operands") {
  CHECK(parse_guard("(a < b)").kind == Guard::Kind::compare);
  CHECK(parse_guard("(x + 1) < 2").kind == Guard::Kind::compare);
  CHECK(parse_guard("not (a < b and c > d)").kind == Guard::Kind::negation);
  CHECK(parse_guard("((a < b) or (c >= d)) and e != f").kind == Guard::Kind::conjunction);
}

TEST_CASE("positioned syntax errors") {
  const SourcePos pos = syntax_error_pos("default: x <- (1 +;");
  CHECK(pos.line == 1);
  CHECK(pos.column == 19);
  const SourcePos second_line = syntax_error_pos("default:\n  x <- 1 $ 2;");
  CHECK(second_line.line == 2);
  CHECK(second_line.column == 10);
  CHECK(syntax_error_pos("default: x <- 1;\ndefault: x <- 2;").line == 2);
  CHECK(syntax_error_pos("default: x <- 1; x <- 2;").column == 18);
  CHECK(syntax_error_pos("default: x <- min(1);").column == 15);
  CHECK(syntax_error_pos("x <- 1;").column == 1);
  CHECK(syntax_error_pos("default: x <- 1e999;").column == 15);
  CHECK(syntax_error_pos("").line == 1);
}

TEST_CASE("deep nesting is a diagnostic, not a crash") {
  std::string deep = "default: x <- " + std::string(100000, '(') + "1;";
  CHECK_THROWS_AS(parse(deep), ParseError);
  std::string nots = "when ";
  for (int i = 0; i < 100000; ++i) nots += "not ";
  nots += "a < b: x <- 1; default: x <- 1;";
  CHECK_THROWS_AS(parse(nots), ParseError);
}

TEST_CASE("validate resolves names against schema and parameters") {
  const StateSchema schema("toy", {{"x", Unit::normalized_length, 0, 1, Role::position, ""},
                                   {"vx", Unit::normalized_length_per_frame, -1, 1,
                                    Role::velocity, "x"}});
  const ParamVector gravity({{"gravity", 9.8, 0, 20}});
  CHECK(validate(parse("default: x <- x + vx; vx <- vx - gravity;"), schema, gravity).ok());

  const auto unresolved = validate(parse("default: x <- zz; vx <- vx;"), schema, gravity);
  REQUIRE(unresolved.errors.size() == 1);
  CHECK(unresolved.errors[0].code == ErrorCode::unresolved_variable);
  CHECK(unresolved.errors[0].identifier == "zz");

  const auto collision =
      validate(parse("default: x <- x; vx <- vx;"), schema, ParamVector({{"x", 0, 0, 1}}));
  REQUIRE_FALSE(collision.ok());
  CHECK(collision.errors[0].code == ErrorCode::namespace_collision);
  CHECK(collision.errors[0].identifier == "x");

  const auto incomplete = validate(parse("default: x <- x;"), schema, {});
  REQUIRE(incomplete.errors.size() == 1);
  CHECK(incomplete.errors[0].code == ErrorCode::incomplete_default);
  CHECK(incomplete.errors[0].identifier == "vx");

  const auto param_target =
      validate(parse("default: x <- x; vx <- vx; gravity <- 1;"), schema, gravity);
  CHECK_FALSE(param_target.ok());
}

TEST_CASE("eval semantics and errors") {
  CHECK(eval(parse_expression("x + v"), {{"x", 0.1}, {"v", 0.02}}) == doctest::Approx(0.12));
  CHECK_THROWS_AS(eval(parse_expression("1/0"), {}), EvalError);
  CHECK_THROWS_AS(eval(parse_expression("sqrt(0 - 1)"), {}), EvalError);
  CHECK_THROWS_AS(eval(parse_expression("y"), {}), EvalError);
  CHECK(eval(parse_expression("min(3, max(1, 2)) + sign(-4) + abs(-2)"), {}) == 3.0);
  try {
    eval(parse_expression("1 + 2 / (a - a)"), {{"a", 1.0}});
  } catch (const EvalError& e) {
    CHECK(e.pos().column == 7);
  }
  CHECK(eval(parse_guard("a < 1 and not b > 2"), {{"a", 0.0}, {"b", 3.0}}) == false);
}

TEST_CASE("simultaneous assignment swaps") {
  const auto out = execute(parse("default: x <- y; y <- x;"), {{"x", 1.0}, {"y", 2.0}});
  CHECK(out.at("x") == 2.0);
  CHECK(out.at("y") == 1.0);
}

TEST_CASE("first matching rule wins and others fall through") {
  const Program p = parse(
      "when x > 0.5: v <- 0 - v;\n"
      "when x > 0.2: v <- 100; x <- 7;\n"
      "default: x <- x + v; v <- v;");
  const auto hit_first = execute(p, {{"x", 0.9}, {"v", 0.1}});
  CHECK(hit_first.at("v") == -0.1);
  CHECK(hit_first.at("x") == doctest::Approx(1.0));
  const auto hit_second = execute(p, {{"x", 0.3}, {"v", 0.1}});
  CHECK(hit_second.at("v") == 100.0);
  CHECK(hit_second.at("x") == 7.0);
  const auto none = execute(p, {{"x", 0.1}, {"v", 0.1}});
  CHECK(none.at("x") == doctest::Approx(0.2));
}

TEST_CASE("print/parse round trip property") {
  SplitMix64 rng(7);
  for (int i = 0; i < 500; ++i) {
    Program p;
    Rule r;
    r.guard = random_guard(rng, 3);
    r.updates.push_back({"x", random_expr(rng, 4), {}, -1});
    p.rules.push_back(std::move(r));
    p.defaults.push_back({"x", random_expr(rng, 5), {}, -1});
    p.defaults.push_back({"vx", random_expr(rng, 5), {}, -1});
    const std::string text = print(p);
    const Program back = parse(text);
    CHECK_MESSAGE(same_structure(p, back), text);
    CHECK(print(back) == text);
  }
}

TEST_CASE("fuzz: random token strings only produce positioned diagnostics") {
  static const char* tokens[] = {
      "when", "default", ":", ";", "<-", "x", "vx", "g", "1", "2.5", "1e-3", "(", ")",
      ",", "+", "-", "*", "/", "<", "<=", ">", ">=", "==", "!=", "and", "or", "not",
      "sin", "min", "sqrt", "\n", "#c\n", "$", "."};
  SplitMix64 rng(2024);
  int parsed = 0;
  int diagnostics = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string src;
    const int n = rng.uniform_int(1, 40);
    for (int k = 0; k < n; ++k) {
      src += tokens[rng.uniform_int(0, static_cast<int>(std::size(tokens)) - 1)];
      src += ' ';
    }
    try {
      const Program p = parse(src);
      ++parsed;
      Bindings b{{"x", 0.5}, {"vx", 0.1}, {"g", 9.8}};
      try {
        execute(p, b);
      } catch (const EvalError& e) {
        CHECK(e.pos().line >= 1);
      }
    } catch (const ParseError& e) {
      ++diagnostics;
      CHECK(e.pos().line >= 1);
      CHECK(e.pos().column >= 1);
    }
  }
  CHECK(parsed + diagnostics == 10000);
}
