#pragma once

#include "cylcalc/quantize.hpp"

namespace cylcalc {

/// Translation-invariant operator on the model cylinder (link x R), realized
/// on a periodic window of n_u axial offsets. The kernel is a pure function
/// of (x, y, t-s): C[k](x, y) is its value at wrapped offset u_k.
struct LimitOperator {
  LinkGrid link;
  double w_link = 0;  // cross-section quadrature weight (h_x; 1 for point sets)
  int n_u = 0;
  double h_u = 0;
  int rank = 1;
  double order = 0;
  double eps = kUnbounded;  // u-support radius
  CalcTag tag = CalcTag::inv;
  std::vector<MatrixXcd> C;  // kernel values, size n_u, each (rank*n_x)^2

  double u(int k) const {
    int w = ((k + n_u / 2) % n_u + n_u) % n_u - n_u / 2;
    return w * h_u;
  }
  int dim_link() const { return rank * link.n_x; }

  /// Indicial matrix at any real tau: h_u * w_link * sum_k e^{-i tau u_k} C[k].
  MatrixXcd indicial(double tau) const;

  /// Operator matrix on the periodic window (block circulant in t).
  MatrixXcd window_matrix() const;

  /// L2 -> L2 operator norm on the window (max singular value over the
  /// lattice indicial matrices).
  double l2_norm() const;

  /// Kernel decay at the window edge, relative to the kernel sup.
  double edge_decay() const;
};

LimitOperator limit_compose(const LimitOperator& A, const LimitOperator& B);
LimitOperator limit_adjoint(const LimitOperator& A);
LimitOperator limit_add(const LimitOperator& A, const LimitOperator& B, Complex alpha,
                        Complex beta);
/// [t, T]: kernel (t-s) C(x,y,t-s).
LimitOperator limit_commutator_with_t(const LimitOperator& A);

/// Exact translation-invariant operator on the model cylinder from multiplier
/// samples M(m, b) = symbol(xi_m, tau_b) (scalar) on the window lattice.
LimitOperator limit_from_multiplier(const LinkGrid& link, int n_u, double h_u,
                                    const MatrixXcd& mult, double order);

/// Limit (normal) operator of P at the chosen end. For inv-tagged operators
/// this is the exact translate-conjugate, asserted equal at two probe depths;
/// for ess operators the two depths give a Cauchy estimate whose gap must stay
/// below `tol`.
LimitOperator limit_operator(const OperatorMatrix& P, End end, double tol = 1e-6,
                             double* cauchy_gap = nullptr);

/// Extension s0(T) = eta T eta back onto the cylinder grid.
OperatorMatrix s0_extend(const LimitOperator& T, const GridPtr& grid, End end);

struct Decomposition {
  OperatorMatrix invariant_part;
  OperatorMatrix compact_part;
  double compact_support_radius = 0;
};

/// P = s0(In_L P) + s0(In_R P) + compact, exact by construction.
Decomposition decompose(const OperatorMatrix& P);

/// Composition as a matrix product with calculus bookkeeping. Errors when two
/// properly supported factors overrun the truncation margin.
OperatorMatrix compose(const OperatorMatrix& P, const OperatorMatrix& Q);

OperatorMatrix operator_add(const OperatorMatrix& P, const OperatorMatrix& Q,
                            Complex alpha, Complex beta);

/// Adjoint with respect to the grid inner product.
OperatorMatrix adjoint(const OperatorMatrix& P);

/// [rho, P] with rho the weight function of the cutoff profile.
OperatorMatrix commutator_with_rho(const OperatorMatrix& P, const CutoffProfile& cut);

/// tau |-> indicial matrices of T, by quadrature of the convolution kernel.
/// Exact at window-lattice frequencies; off-lattice values additionally
/// require kernel decay at the window edge below `edge_tol`.
struct IndicialFamily {
  VectorXd taus;
  std::vector<MatrixXcd> mats;
  double edge_decay = 0;
};

IndicialFamily indicial_family(const LimitOperator& T, const VectorXd& taus,
                               double edge_tol = 1e-10);

struct ParametrixResult {
  OperatorMatrix Q;
  double residual_left = 0;   // ||1 - QP|| after order reduction
  double residual_right = 0;  // ||1 - PQ||
};

/// Parametrix from the inverse principal symbol, improved by the Neumann
/// iteration Q <- (1 + R + ... + R^{N-1}) Q, R = 1 - QP.
ParametrixResult parametrix(const OperatorMatrix& P, const ClassicalSymbol& symb,
                            const CutoffProfile& chi, int N_order = 3);

struct OrderReduction {
  OperatorMatrix op;  // Lambda_s
  double t0 = 0;
  double residual_right = 0;  // ||Lambda_s Lambda_{-s} - 1||_{L2->L2}
  double residual_left = 0;   // ||Lambda_{-s} Lambda_s - 1||_{H^s->H^s}
  bool certified = false;     // both residuals < 1
};

OrderReduction order_reduction(double s, double t0, const GridPtr& grid,
                               const CutoffProfile& chi);
/// Doubles t0 until both residuals fall below `target`, then bisects.
OrderReduction order_reduction_auto(double s, const GridPtr& grid,
                                    const CutoffProfile& chi, double target = 0.5);

/// Block operator with Douglis-Nirenberg order data.
struct ADNSystem {
  ADNOrderSpec spec;
  GridPtr grid;
  std::vector<std::vector<std::optional<OperatorMatrix>>> blocks;
  SymbolMatrix symb;
};

ADNSystem adn_compose(const ADNSystem& Q, const ADNSystem& P);
ADNSystem adn_adjoint(const ADNSystem& P);

/// Stacked (k*N)^2 matrix of the system (zero blocks filled).
MatrixXcd adn_stacked(const ADNSystem& S);

}  // namespace cylcalc
