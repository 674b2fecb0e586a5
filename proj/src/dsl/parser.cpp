#include "vidprog/dsl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace vidprog::dsl {

namespace {

enum class Tok {
  number,
  ident,
  kw_when,
  kw_default,
  kw_and,
  kw_or,
  kw_not,
  plus,
  minus,
  star,
  slash,
  lparen,
  rparen,
  comma,
  semicolon,
  colon,
  arrow,
  lt,
  le,
  gt,
  ge,
  eq,
  ne,
  end,
};

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

std::string describe(const Token& t) {
  if (t.kind == Tok::end) return "end of input";
  return "'" + t.text + "'";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.pos = {line_, col_};
      if (at_end()) {
        t.kind = Tok::end;
        out.push_back(t);
        return out;
      }
      const char c = src_[i_];
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && i_ + 1 < src_.size() &&
           std::isdigit(static_cast<unsigned char>(src_[i_ + 1])))) {
        lex_number(t);
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        lex_word(t);
      } else {
        lex_symbol(t);
      }
      out.push_back(std::move(t));
    }
  }

 private:
  bool at_end() const { return i_ >= src_.size(); }

  void advance() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = src_[i_];
      if (c == '#') {
        while (!at_end() && src_[i_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        return;
      }
    }
  }

  bool digit_at(std::size_t j) const {
    return j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]));
  }

  void lex_number(Token& t) {
    const std::size_t start = i_;
    while (digit_at(i_)) advance();
    if (!at_end() && src_[i_] == '.') {
      advance();
      while (digit_at(i_)) advance();
    }
    if (!at_end() && (src_[i_] == 'e' || src_[i_] == 'E')) {
      std::size_t j = i_ + 1;
      if (j < src_.size() && (src_[j] == '+' || src_[j] == '-')) ++j;
      if (digit_at(j)) {
        while (i_ < j) advance();
        while (digit_at(i_)) advance();
      }
    }
    t.kind = Tok::number;
    t.text = std::string(src_.substr(start, i_ - start));
    // from_chars rejects a leading '.', so parse "0" + text in that case.
    std::string padded = t.text.front() == '.' ? "0" + t.text : t.text;
    auto [ptr, ec] = std::from_chars(padded.data(), padded.data() + padded.size(), t.number);
    if (ec != std::errc{} || ptr != padded.data() + padded.size() || !std::isfinite(t.number)) {
      throw ParseError(t.pos, "numeric literal '" + t.text + "' is out of range");
    }
  }

  void lex_word(Token& t) {
    const std::size_t start = i_;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_')) {
      advance();
    }
    t.text = std::string(src_.substr(start, i_ - start));
    if (t.text == "when") t.kind = Tok::kw_when;
    else if (t.text == "default") t.kind = Tok::kw_default;
    else if (t.text == "and") t.kind = Tok::kw_and;
    else if (t.text == "or") t.kind = Tok::kw_or;
    else if (t.text == "not") t.kind = Tok::kw_not;
    else t.kind = Tok::ident;
  }

  void lex_symbol(Token& t) {
    const char c = src_[i_];
    const char n = i_ + 1 < src_.size() ? src_[i_ + 1] : '\0';
    auto one = [&](Tok k) {
      t.kind = k;
      t.text = std::string(1, c);
      advance();
    };
    auto two = [&](Tok k) {
      t.kind = k;
      t.text = std::string{c, n};
      advance();
      advance();
    };
    switch (c) {
      case '+': return one(Tok::plus);
      case '-': return one(Tok::minus);
      case '*': return one(Tok::star);
      case '/': return one(Tok::slash);
      case '(': return one(Tok::lparen);
      case ')': return one(Tok::rparen);
      case ',': return one(Tok::comma);
      case ';': return one(Tok::semicolon);
      case ':': return one(Tok::colon);
      case '<':
        if (n == '-') return two(Tok::arrow);
        if (n == '=') return two(Tok::le);
        return one(Tok::lt);
      case '>':
        if (n == '=') return two(Tok::ge);
        return one(Tok::gt);
      case '=':
        if (n == '=') return two(Tok::eq);
        break;
      case '!':
        if (n == '=') return two(Tok::ne);
        break;
      default:
        break;
    }
    const auto u = static_cast<unsigned char>(c);
    std::string shown = std::isprint(u) ? std::string("'") + c + "'"
                                        : "byte 0x" + std::to_string(static_cast<int>(u));
    throw ParseError(t.pos, "unexpected character " + shown);
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (peek().kind == Tok::kw_when) {
      Rule r;
      r.pos = next().pos;
      r.guard = guard();
      expect(Tok::colon, "':' after rule guard");
      r.updates = updates();
      p.rules.push_back(std::move(r));
    }
    if (peek().kind != Tok::kw_default) {
      throw ParseError(peek().pos, "expected 'when' or 'default', found " + describe(peek()));
    }
    next();
    expect(Tok::colon, "':' after 'default'");
    p.defaults = updates();
    if (peek().kind == Tok::kw_default) {
      throw ParseError(peek().pos, "duplicate default block");
    }
    if (peek().kind == Tok::kw_when) {
      throw ParseError(peek().pos, "rules must precede the default block");
    }
    expect_end();
    return p;
  }

  Expr whole_expression() {
    Expr e = expr();
    expect_end();
    return e;
  }

  Guard whole_guard() {
    Guard g = guard();
    expect_end();
    return g;
  }

 private:
  const Token& peek() const { return toks_[k_]; }
  const Token& next() {
    const Token& t = toks_[k_];
    if (t.kind != Tok::end) ++k_;
    return t;
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) {
      throw ParseError(peek().pos, std::string("expected ") + what + ", found " + describe(peek()));
    }
    return next();
  }

  void expect_end() {
    if (peek().kind != Tok::end) {
      throw ParseError(peek().pos, "unexpected " + describe(peek()) + " after end of input");
    }
  }

  struct DepthGuard {
    explicit DepthGuard(Parser& p, SourcePos pos) : p_(p) {
      if (++p_.depth_ > kMaxNesting) throw ParseError(pos, "nesting too deep");
    }
    ~DepthGuard() { --p_.depth_; }
    Parser& p_;
  };

  std::vector<Update> updates() {
    std::vector<Update> out;
    std::set<std::string> assigned;
    do {
      const Token& name = peek();
      if (name.kind != Tok::ident) {
        throw ParseError(name.pos, "expected assignment target, found " + describe(name));
      }
      next();
      if (!assigned.insert(name.text).second) {
        throw ParseError(name.pos, "attribute '" + name.text + "' assigned twice in one block");
      }
      expect(Tok::arrow, "'<-'");
      Update u;
      u.target = name.text;
      u.pos = name.pos;
      u.value = expr();
      expect(Tok::semicolon, "';' after update");
      out.push_back(std::move(u));
    } while (peek().kind == Tok::ident);
    return out;
  }

  Expr expr() {
    Expr lhs = term();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      const Token& op = next();
      Expr rhs = term();
      lhs = Expr::binary(op.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub, std::move(lhs),
                         std::move(rhs), op.pos);
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (peek().kind == Tok::star || peek().kind == Tok::slash) {
      const Token& op = next();
      Expr rhs = factor();
      lhs = Expr::binary(op.kind == Tok::star ? BinaryOp::mul : BinaryOp::div, std::move(lhs),
                         std::move(rhs), op.pos);
    }
    return lhs;
  }

  Expr factor() {
    if (peek().kind == Tok::minus) {
      const SourcePos pos = next().pos;
      return Expr::negate(atom(), pos);
    }
    return atom();
  }

  Expr atom() {
    const Token& t = peek();
    DepthGuard depth(*this, t.pos);
    switch (t.kind) {
      case Tok::number:
        next();
        return Expr::literal(t.number, t.pos);
      case Tok::ident: {
        next();
        Function fn;
        if (parse_function(t.text, fn)) {
          expect(Tok::lparen, ("'(' after function '" + t.text + "'").c_str());
          std::vector<Expr> args;
          args.push_back(expr());
          if (peek().kind == Tok::comma) {
            next();
            args.push_back(expr());
          }
          expect(Tok::rparen, "')' closing call");
          if (static_cast<int>(args.size()) != arity(fn)) {
            throw ParseError(t.pos, "function '" + t.text + "' takes " +
                                        std::to_string(arity(fn)) + " argument(s), got " +
                                        std::to_string(args.size()));
          }
          return Expr::call(fn, std::move(args), t.pos);
        }
        return Expr::variable(t.text, t.pos);
      }
      case Tok::lparen: {
        next();
        Expr inner = expr();
        expect(Tok::rparen, "')'");
        return inner;
      }
      default:
        throw ParseError(t.pos, "expected expression, found " + describe(t));
    }
  }

  Guard guard() {
    Guard lhs = conjunction();
    while (peek().kind == Tok::kw_or) {
      const SourcePos pos = next().pos;
      Guard rhs = conjunction();
      Guard g;
      g.kind = Guard::Kind::disjunction;
      g.pos = pos;
      g.children.push_back(std::move(lhs));
      g.children.push_back(std::move(rhs));
      lhs = std::move(g);
    }
    return lhs;
  }

  Guard conjunction() {
    Guard lhs = clause();
    while (peek().kind == Tok::kw_and) {
      const SourcePos pos = next().pos;
      Guard rhs = clause();
      Guard g;
      g.kind = Guard::Kind::conjunction;
      g.pos = pos;
      g.children.push_back(std::move(lhs));
      g.children.push_back(std::move(rhs));
      lhs = std::move(g);
    }
    return lhs;
  }

  Guard clause() {
    DepthGuard depth(*this, peek().pos);
    if (peek().kind == Tok::kw_not) {
      const SourcePos pos = next().pos;
      Guard g;
      g.kind = Guard::Kind::negation;
      g.pos = pos;
      g.children.push_back(clause_body());
      return g;
    }
    return clause_body();
  }

  Guard clause_body() {
    if (peek().kind == Tok::lparen) {
      // "(" may open a nested guard or a parenthesized comparison operand.
      const std::size_t mark = k_;
      std::optional<ParseError> nested_error;
      try {
        next();
        Guard inner = guard();
        expect(Tok::rparen, "')' closing guard");
        return inner;
      } catch (const ParseError& e) {
        nested_error = e;
      }
      const std::size_t nested_reach = k_;
      k_ = mark;
      try {
        return comparison();
      } catch (const ParseError& e) {
        // Report whichever reading got further into the input.
        if (k_ >= nested_reach) throw;
        throw *nested_error;
      }
    }
    return comparison();
  }

  Guard comparison() {
    Guard g;
    g.kind = Guard::Kind::compare;
    g.pos = peek().pos;
    g.operands.push_back(expr());
    const Token& op = peek();
    switch (op.kind) {
      case Tok::lt: g.cmp = CompareOp::lt; break;
      case Tok::le: g.cmp = CompareOp::le; break;
      case Tok::gt: g.cmp = CompareOp::gt; break;
      case Tok::ge: g.cmp = CompareOp::ge; break;
      case Tok::eq: g.cmp = CompareOp::eq; break;
      case Tok::ne: g.cmp = CompareOp::ne; break;
      default:
        throw ParseError(op.pos, "expected comparison operator, found " + describe(op));
    }
    next();
    g.operands.push_back(expr());
    return g;
  }

  std::vector<Token> toks_;
  std::size_t k_ = 0;
  int depth_ = 0;
};

}  // namespace

Program parse(std::string_view source) {
  return Parser(Lexer(source).run()).program();
}

Expr parse_expression(std::string_view source) {
  return Parser(Lexer(source).run()).whole_expression();
}

Guard parse_guard(std::string_view source) {
  return Parser(Lexer(source).run()).whole_guard();
}

}  // namespace vidprog::dsl
