#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cylcalc/expr.hpp"
#include "cylcalc/fft.hpp"

namespace cylcalc {

/// Scalar symbol on T*M for the model cylinder. Values at (x, t, xi, tau);
/// t-dependence confined to |t| < R_a.
struct FullSymbol {
  double order = 0;
  double R_a = 0;
  int derivative_depth = 2;
  std::function<Complex(double x, double t, double xi, double tau)> eval;
  bool depends_x = false;
  bool depends_t = false;
  /// Set when the symbol is polynomial in (xi, tau): max degrees.
  std::optional<std::pair<int, int>> poly;

  Complex operator()(double x, double t, double xi, double tau) const {
    return eval(x, t, xi, tau);
  }
};

/// Classical symbol: order m and homogeneous components a_{m-j}, j = 0..N.
/// Components are stored on the cosphere; for |zeta| >= 1 the value is
/// |zeta|^{m-j} times the cosphere value.
struct ClassicalSymbol {
  double order = 0;
  double R_a = 0;
  int N_terms = 1;
  /// component j evaluated at (x, t, unit direction (wx, wt))
  std::vector<std::function<Complex(double, double, double, double)>> components;

  Complex component_at(int j, double x, double t, double xi, double tau) const {
    double r = std::hypot(xi, tau);
    if (r == 0) return 0;
    return components[j](x, t, xi / r, tau / r) * std::pow(r, order - j);
  }
};

FullSymbol symbol_from_expression(const expr::NodePtr& ast, double order);
FullSymbol symbol_from_function(std::function<Complex(double, double, double, double)> f,
                                double order, double R_a, bool dep_x, bool dep_t);

/// a_{s,t0}(zeta) = (t0^2 + |zeta|^2)^{s/2}, the order-reduction symbol.
FullSymbol order_reduction_symbol(double s, double t0);

/// Pointwise product; order adds, invariance radii take the max.
FullSymbol symbol_product(const FullSymbol& a, const FullSymbol& b);

/// Asymptotic sum of components a_{m-j} (orders decreasing by 1, shared R):
/// excision scales are chosen so each added term is small. Throws when a
/// component has non-finite cosphere sup (reports the offending j).
FullSymbol asymptotic_sum(const std::vector<FullSymbol>& components);

/// Extracts the homogeneous components of a full symbol by Richardson
/// extrapolation along rays; exact for positively homogeneous inputs.
ClassicalSymbol classical_from_full(const FullSymbol& a, int n_components = 1);

struct EllipticityResult {
  bool elliptic = false;
  double constant = 0;   // measured min |a_m| (resp. min |det|^{1/r}) on the cosphere
  double max_value = 0;  // cosphere sup, for relative thresholds
};

/// Cosphere sampling resolution used by the ellipticity checks.
struct CosphereSample {
  int n_angles = 512;
  std::vector<double> x_samples{0.0, 0.7, 1.9, 3.3, 4.9};
  std::vector<double> t_samples{0.0, -0.7, 0.7, -1.9, 1.9, -5.1, 5.1};
};

EllipticityResult is_elliptic(const ClassicalSymbol& a, double tol_ell = 0,
                              const CosphereSample& sample = {});

/// Douglis-Nirenberg order data [s+t].
struct ADNOrderSpec {
  int k = 1;
  std::vector<double> s, t;
  double block_order(int i, int j) const { return s[i] + t[j]; }
};

/// Principal symbol matrix of an ADN system; empty entries are zero blocks.
struct SymbolMatrix {
  ADNOrderSpec spec;
  std::vector<std::vector<std::optional<ClassicalSymbol>>> blocks;

  MatrixXcd principal_at(double x, double t, double wx, double wt,
                         double lambda = 1.0) const;
};

/// Assembles the matrix and verifies the two-scale homogeneity identity
/// Symb(lambda zeta) = lambda^[s] Symb(zeta) lambda^[t].
SymbolMatrix adn_symbol_matrix(
    const std::vector<std::vector<std::optional<ClassicalSymbol>>>& blocks,
    const ADNOrderSpec& spec);

struct ADNEllipticityResult {
  bool elliptic = false;
  double min_det = 0;
  double max_det = 0;
  double scale_defect = 0;  // two-scale homogeneity defect
};

ADNEllipticityResult is_adn_elliptic(const SymbolMatrix& S, double tol_ell = 0,
                                     const CosphereSample& sample = {});

/// Sampled Kohn-Nirenberg seminorm p^[q]_{alpha,beta} via finite differences.
double sampled_seminorm(const FullSymbol& a, int alpha_x, int alpha_t, int beta_xi,
                        int beta_tau, double q);

}  // namespace cylcalc
