#include "cylcalc/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cylcalc {
namespace expr {

NodePtr number(std::complex<double> v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::number;
  n->value = v;
  return n;
}

NodePtr variable(Var v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::variable;
  n->var = v;
  return n;
}

NodePtr binary(Kind k, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = {std::move(a), std::move(b)};
  return n;
}

NodePtr neg(NodePtr a) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::unary_neg;
  n->args = {std::move(a)};
  return n;
}

NodePtr call(std::string f, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::call;
  n->func = std::move(f);
  n->args = std::move(args);
  return n;
}

// ---------------------------------------------------------------- lexer

namespace {

struct Token {
  enum Type { num, ident, op, end } type;
  std::string text;
  double val = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& s;
  size_t pos = 0;
  int line = 1, col = 1;
  Token cur;

  explicit Lexer(const std::string& str) : s(str) { advance(); }

  void bump_pos(char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }

  void advance() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) {
      bump_pos(s[pos]);
      ++pos;
    }
    cur.line = line;
    cur.col = col;
    if (pos >= s.size()) {
      cur.type = Token::end;
      cur.text.clear();
      return;
    }
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t start = pos;
      while (pos < s.size() &&
             (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.'))
        bump_pos(s[pos]), ++pos;
      if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        size_t save = pos;
        bump_pos(s[pos]), ++pos;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) bump_pos(s[pos]), ++pos;
        if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
            bump_pos(s[pos]), ++pos;
        } else {
          pos = save;  // bare 'e' belongs to the next token
        }
      }
      cur.type = Token::num;
      cur.text = s.substr(start, pos - start);
      cur.val = std::strtod(cur.text.c_str(), nullptr);
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                                s[pos] == '_'))
        bump_pos(s[pos]), ++pos;
      cur.type = Token::ident;
      cur.text = s.substr(start, pos - start);
      return;
    }
    cur.type = Token::op;
    cur.text = std::string(1, c);
    bump_pos(c);
    ++pos;
    return;
  }
};

struct Parser {
  Lexer lex;
  explicit Parser(const std::string& s) : lex(s) {}

  [[noreturn]] void fail(const std::string& msg) {
    throw ParseError(msg, lex.cur.line, lex.cur.col);
  }

  bool eat_op(const std::string& o) {
    if (lex.cur.type == Token::op && lex.cur.text == o) {
      lex.advance();
      return true;
    }
    return false;
  }

  void expect_op(const std::string& o) {
    if (!eat_op(o)) fail("expected '" + o + "'");
  }

  NodePtr parse_expr() { return parse_add(); }

  NodePtr parse_add() {
    NodePtr a = parse_mul();
    for (;;) {
      if (eat_op("+"))
        a = binary(Kind::add, a, parse_mul());
      else if (eat_op("-"))
        a = binary(Kind::sub, a, parse_mul());
      else
        return a;
    }
  }

  NodePtr parse_mul() {
    NodePtr a = parse_unary();
    for (;;) {
      if (eat_op("*"))
        a = binary(Kind::mul, a, parse_unary());
      else if (eat_op("/"))
        a = binary(Kind::div, a, parse_unary());
      else
        return a;
    }
  }

  NodePtr parse_unary() {
    if (eat_op("-")) return neg(parse_unary());
    if (eat_op("+")) return parse_unary();
    return parse_pow();
  }

  NodePtr parse_pow() {
    NodePtr base = parse_atom();
    if (eat_op("^")) {
      // right associative; exponent may be signed
      NodePtr e = parse_unary();
      return binary(Kind::pow, base, e);
    }
    return base;
  }

  NodePtr parse_atom() {
    if (lex.cur.type == Token::num) {
      double v = lex.cur.val;
      lex.advance();
      return number(v);
    }
    if (lex.cur.type == Token::ident) {
      std::string id = lex.cur.text;
      lex.advance();
      if (id == "x") return variable(Var::x);
      if (id == "t") return variable(Var::t);
      if (id == "xi") return variable(Var::xi);
      if (id == "tau") return variable(Var::tau);
      if (id == "pi") return number(M_PI);
      if (id == "i") return number(std::complex<double>(0, 1));
      if (id == "sqrt" || id == "exp" || id == "sin" || id == "cos" || id == "pow" ||
          id == "bump") {
        expect_op("(");
        std::vector<NodePtr> args;
        args.push_back(parse_expr());
        while (eat_op(",")) args.push_back(parse_expr());
        expect_op(")");
        size_t want = id == "bump" ? 3 : (id == "pow" ? 2 : 1);
        if (args.size() != want)
          fail(id + " takes " + std::to_string(want) + " argument(s)");
        if (id == "pow") return binary(Kind::pow, args[0], args[1]);
        return call(id, std::move(args));
      }
      fail("unknown identifier '" + id + "'");
    }
    if (eat_op("(")) {
      NodePtr e = parse_expr();
      expect_op(")");
      return e;
    }
    fail("expected a value");
  }
};

}  // namespace

NodePtr parse(const std::string& text) {
  Parser p(text);
  NodePtr e = p.parse_expr();
  if (p.lex.cur.type != Token::end) p.fail("trailing input");
  return e;
}

// ---------------------------------------------------------------- eval

std::complex<double> eval(const NodePtr& n, const Env& env) {
  using C = std::complex<double>;
  switch (n->kind) {
    case Kind::number:
      return n->value;
    case Kind::variable:
      switch (n->var) {
        case Var::x: return env.x;
        case Var::t: return env.t;
        case Var::xi: return env.xi;
        case Var::tau: return env.tau;
      }
      return 0;
    case Kind::unary_neg:
      return -eval(n->args[0], env);
    case Kind::add:
      return eval(n->args[0], env) + eval(n->args[1], env);
    case Kind::sub:
      return eval(n->args[0], env) - eval(n->args[1], env);
    case Kind::mul:
      return eval(n->args[0], env) * eval(n->args[1], env);
    case Kind::div:
      return eval(n->args[0], env) / eval(n->args[1], env);
    case Kind::pow: {
      C b = eval(n->args[0], env);
      C e = eval(n->args[1], env);
      if (e.imag() == 0 && e.real() == std::round(e.real()) &&
          std::abs(e.real()) <= 64) {
        // exact integer powers, valid also at b = 0
        int k = int(e.real());
        C r = 1.0;
        C base = k >= 0 ? b : C(1.0) / b;
        for (int q = 0; q < std::abs(k); ++q) r *= base;
        return r;
      }
      if (b.imag() == 0 && b.real() >= 0 && e.imag() == 0)
        return std::pow(b.real(), e.real());
      return std::pow(b, e);
    }
    case Kind::call: {
      C a = eval(n->args[0], env);
      if (n->func == "sqrt") return std::sqrt(a);
      if (n->func == "exp") return std::exp(a);
      if (n->func == "sin") return std::sin(a);
      if (n->func == "cos") return std::cos(a);
      if (n->func == "bump") {
        double lo = eval(n->args[1], env).real();
        double hi = eval(n->args[2], env).real();
        double r = (2.0 * a.real() - lo - hi) / (hi - lo);
        if (std::abs(r) >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - r * r));
      }
      throw std::runtime_error("eval: unknown function " + n->func);
    }
  }
  return 0;
}

// ---------------------------------------------------------------- calculus

NodePtr differentiate(const NodePtr& n, Var v) {
  switch (n->kind) {
    case Kind::number:
      return number(0.0);
    case Kind::variable:
      return number(n->var == v ? 1.0 : 0.0);
    case Kind::unary_neg:
      return neg(differentiate(n->args[0], v));
    case Kind::add:
      return binary(Kind::add, differentiate(n->args[0], v), differentiate(n->args[1], v));
    case Kind::sub:
      return binary(Kind::sub, differentiate(n->args[0], v), differentiate(n->args[1], v));
    case Kind::mul:
      return binary(Kind::add,
                    binary(Kind::mul, differentiate(n->args[0], v), n->args[1]),
                    binary(Kind::mul, n->args[0], differentiate(n->args[1], v)));
    case Kind::div:
      return binary(
          Kind::div,
          binary(Kind::sub,
                 binary(Kind::mul, differentiate(n->args[0], v), n->args[1]),
                 binary(Kind::mul, n->args[0], differentiate(n->args[1], v))),
          binary(Kind::pow, n->args[1], number(2.0)));
    case Kind::pow: {
      if (uses_var(n->args[1], v))
        throw std::runtime_error("differentiate: exponent depends on the variable");
      // d(u^e) = e * u^(e-1) * u'
      NodePtr e = n->args[1];
      NodePtr em1 = binary(Kind::sub, e, number(1.0));
      return binary(Kind::mul, binary(Kind::mul, e, binary(Kind::pow, n->args[0], em1)),
                    differentiate(n->args[0], v));
    }
    case Kind::call: {
      NodePtr u = n->args[0];
      NodePtr du = differentiate(u, v);
      if (n->func == "sqrt")
        return binary(Kind::div, du,
                      binary(Kind::mul, number(2.0), call("sqrt", {u})));
      if (n->func == "exp") return binary(Kind::mul, call("exp", {u}), du);
      if (n->func == "sin") return binary(Kind::mul, call("cos", {u}), du);
      if (n->func == "cos") return neg(binary(Kind::mul, call("sin", {u}), du));
      if (n->func == "bump") {
        // with r = (2u-a-b)/(b-a):  d bump = bump * (-2 r / (1-r^2)^2) * dr
        NodePtr a = n->args[1], b = n->args[2];
        NodePtr width = binary(Kind::sub, b, a);
        NodePtr r = binary(Kind::div,
                           binary(Kind::sub, binary(Kind::mul, number(2.0), u),
                                  binary(Kind::add, a, b)),
                           width);
        NodePtr one_m_r2 =
            binary(Kind::sub, number(1.0), binary(Kind::pow, r, number(2.0)));
        NodePtr dr = binary(Kind::div, binary(Kind::mul, number(2.0), du), width);
        NodePtr factor = neg(binary(
            Kind::div, binary(Kind::mul, number(2.0), r),
            binary(Kind::pow, one_m_r2, number(2.0))));
        return binary(Kind::mul,
                      binary(Kind::mul, call("bump", {u, a, b}), factor), dr);
      }
      throw std::runtime_error("differentiate: unknown function " + n->func);
    }
  }
  return number(0.0);
}

// ---------------------------------------------------------------- printing

static std::string fmt_num(std::complex<double> v) {
  char buf[64];
  if (v.imag() == 0.0) {
    if (v.real() >= 0) {
      std::snprintf(buf, sizeof buf, "%.17g", v.real());
      return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", -v.real());
    return "(0 - " + std::string(buf) + ")";
  }
  if (v.real() == 0.0 && v.imag() == 1.0) return "i";
  std::string re, im;
  std::snprintf(buf, sizeof buf, "%.17g", v.real());
  re = buf;
  std::snprintf(buf, sizeof buf, "%.17g", v.imag());
  im = buf;
  return "(" + re + " + " + im + " * i)";
}

std::string pretty_print(const NodePtr& n) {
  switch (n->kind) {
    case Kind::number:
      return fmt_num(n->value);
    case Kind::variable:
      switch (n->var) {
        case Var::x: return "x";
        case Var::t: return "t";
        case Var::xi: return "xi";
        case Var::tau: return "tau";
      }
      return "?";
    case Kind::unary_neg:
      return "(-" + pretty_print(n->args[0]) + ")";
    case Kind::add:
      return "(" + pretty_print(n->args[0]) + " + " + pretty_print(n->args[1]) + ")";
    case Kind::sub:
      return "(" + pretty_print(n->args[0]) + " - " + pretty_print(n->args[1]) + ")";
    case Kind::mul:
      return "(" + pretty_print(n->args[0]) + " * " + pretty_print(n->args[1]) + ")";
    case Kind::div:
      return "(" + pretty_print(n->args[0]) + " / " + pretty_print(n->args[1]) + ")";
    case Kind::pow:
      return "(" + pretty_print(n->args[0]) + " ^ " + pretty_print(n->args[1]) + ")";
    case Kind::call: {
      std::string s = n->func + "(";
      for (size_t k = 0; k < n->args.size(); ++k) {
        if (k) s += ", ";
        s += pretty_print(n->args[k]);
      }
      return s + ")";
    }
  }
  return "?";
}

bool equal(const NodePtr& a, const NodePtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::number:
      return a->value == b->value;
    case Kind::variable:
      return a->var == b->var;
    case Kind::call:
      if (a->func != b->func) return false;
      [[fallthrough]];
    default:
      if (a->args.size() != b->args.size()) return false;
      for (size_t k = 0; k < a->args.size(); ++k)
        if (!equal(a->args[k], b->args[k])) return false;
      return true;
  }
}

bool uses_var(const NodePtr& n, Var v) {
  if (n->kind == Kind::variable) return n->var == v;
  for (const auto& a : n->args)
    if (uses_var(a, v)) return true;
  return false;
}

static bool t_check(const NodePtr& n, bool inside_bump) {
  if (n->kind == Kind::variable) return n->var != Var::t || inside_bump;
  if (n->kind == Kind::call && n->func == "bump") {
    if (!t_check(n->args[0], true)) return false;
    return t_check(n->args[1], inside_bump) && t_check(n->args[2], inside_bump);
  }
  for (const auto& a : n->args)
    if (!t_check(a, inside_bump)) return false;
  return true;
}

bool t_confined_to_bumps(const NodePtr& n) { return t_check(n, false); }

std::optional<std::pair<int, int>> poly_degrees(const NodePtr& n) {
  using P = std::pair<int, int>;
  switch (n->kind) {
    case Kind::number:
      return P{0, 0};
    case Kind::variable:
      if (n->var == Var::xi) return P{1, 0};
      if (n->var == Var::tau) return P{0, 1};
      return P{0, 0};
    case Kind::unary_neg:
      return poly_degrees(n->args[0]);
    case Kind::add:
    case Kind::sub: {
      auto a = poly_degrees(n->args[0]), b = poly_degrees(n->args[1]);
      if (!a || !b) return std::nullopt;
      return P{std::max(a->first, b->first), std::max(a->second, b->second)};
    }
    case Kind::mul: {
      auto a = poly_degrees(n->args[0]), b = poly_degrees(n->args[1]);
      if (!a || !b) return std::nullopt;
      return P{a->first + b->first, a->second + b->second};
    }
    case Kind::div: {
      auto a = poly_degrees(n->args[0]), b = poly_degrees(n->args[1]);
      if (!a || !b || b->first + b->second != 0) return std::nullopt;
      return a;
    }
    case Kind::pow: {
      auto a = poly_degrees(n->args[0]);
      if (!a) return std::nullopt;
      if (a->first + a->second == 0) {
        auto e = poly_degrees(n->args[1]);
        if (e && e->first + e->second == 0) return P{0, 0};
        return std::nullopt;
      }
      const Node& e = *n->args[1];
      if (e.kind == Kind::number && e.value.imag() == 0 &&
          e.value.real() == std::round(e.value.real()) && e.value.real() >= 0) {
        int k = int(e.value.real());
        return P{a->first * k, a->second * k};
      }
      return std::nullopt;
    }
    case Kind::call: {
      for (const auto& arg : n->args) {
        auto d = poly_degrees(arg);
        if (!d || d->first + d->second != 0) return std::nullopt;
      }
      return P{0, 0};
    }
  }
  return std::nullopt;
}

}  // namespace expr
}  // namespace cylcalc
