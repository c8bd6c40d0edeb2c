#pragma once

#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cylcalc {

/// Expressions over {x, t, xi, tau} with +, -, *, /, ^, sqrt, exp, sin, cos,
/// bump(t, a, b) and the constants pi and i. Closed under differentiation.
namespace expr {

enum class Kind { number, variable, unary_neg, add, sub, mul, div, pow, call };
enum class Var { x, t, xi, tau };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Kind kind;
  std::complex<double> value{};           // number
  Var var{};                              // variable
  std::string func;                       // call: sqrt|exp|sin|cos|bump
  std::vector<NodePtr> args;              // operands / call arguments
};

struct Env {
  double x = 0, t = 0, xi = 0, tau = 0;
};

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg), line(line_), col(col_) {}
};

/// Parses a single expression. Offsets in errors are 1-based within `text`.
NodePtr parse(const std::string& text);

std::complex<double> eval(const NodePtr& n, const Env& env);

/// Symbolic derivative; exponents must be constant for pow.
NodePtr differentiate(const NodePtr& n, Var v);

/// Canonical fully-parenthesized form; parse(pretty_print(n)) equals n.
std::string pretty_print(const NodePtr& n);

bool equal(const NodePtr& a, const NodePtr& b);

bool uses_var(const NodePtr& n, Var v);

/// True when every occurrence of t sits inside the first argument of a bump.
bool t_confined_to_bumps(const NodePtr& n);

/// Max (xi, tau) polynomial degrees when the expression is polynomial in
/// (xi, tau); nullopt otherwise.
std::optional<std::pair<int, int>> poly_degrees(const NodePtr& n);

NodePtr number(std::complex<double> v);
NodePtr variable(Var v);
NodePtr binary(Kind k, NodePtr a, NodePtr b);
NodePtr call(std::string f, std::vector<NodePtr> args);

}  // namespace expr
}  // namespace cylcalc
