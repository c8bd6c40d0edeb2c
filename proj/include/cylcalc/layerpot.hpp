#pragma once

#include "cylcalc/fredholm.hpp"
#include "cylcalc/specfile.hpp"

namespace cylcalc {

/// Vertical submanifold N = N_inf x (t-grid); codimension 1 in the model.
struct Submanifold {
  std::vector<int> x_indices;
  int codim = 1;
  double normal_x = 1, normal_t = 0;  // unit normal (constant beyond R_inv)
};

enum class LayerKind { single, double_ };

struct LayerOperator {
  RestrictedOperator op;
  LayerKind kind = LayerKind::single;
  double source_order = 0;
  bool pv_converged = true;   // double layer only
  double pv_gap = 0;          // last shell increment, relative
};

/// Single layer: restriction of the dense inverse to N. Runs
/// invert_and_verify as a precondition.
LayerOperator single_layer(const OperatorMatrix& P, const ClassicalSymbol& symb,
                           double m, const Submanifold& N);
/// Single layer from an already computed inverse.
LayerOperator single_layer_from_inverse(const OperatorMatrix& Pinv, double source_order,
                                        const Submanifold& N);

/// Double layer: normal derivative of the inverse kernel restricted to N x N,
/// centered differences with Richardson extrapolation, principal-value
/// diagonal.
LayerOperator double_layer_from_inverse(const OperatorMatrix& Pinv, double source_order,
                                        const Submanifold& N);

/// tau-symbol of a layer operator on a single line (DFT of its convolution
/// kernel); requires a translation-invariant kernel (circulant, or deep-row
/// extraction for inv-tagged operators).
VectorXcd line_tau_symbol(const RestrictedOperator& S, VectorXd& taus_out);

/// Relative defect || In(P|_N) - In(P)|_N || measured on the line kernels.
double restriction_limit_defect(const OperatorMatrix& P, const RestrictedOperator& S,
                                const Submanifold& N);

/// x-invariant exact-multiplier inverse: the fast path for polynomial,
/// coefficient-free symbols on large link grids (block-diagonal over the
/// circle frequencies, so n_x can be large).
struct MultiplierInverse {
  GridPtr grid;
  MatrixXcd mult_inv;  // (n_t, n_x) layout: entry (b, m) = 1 / a(xi_m, tau_b)
  double source_order = 0;
  double min_abs = 0, max_abs = 0;  // of the forward multiplier
};

MultiplierInverse invert_multiplier(const FullSymbol& a, const GridPtr& grid,
                                    double tol_inv = 0);
LayerOperator single_layer_multiplier(const MultiplierInverse& M, const Submanifold& N);
LayerOperator double_layer_multiplier(const MultiplierInverse& M, const Submanifold& N);

struct LayerPipelineResult {
  bool ok = false;
  std::string stage;  // stage reached: ellipticity | fredholm | invert | layer | done
  std::string failure;
  FredholmReport fredholm;
  bool have_membership = false;
  MembershipReport membership;
  double inv_min_singular = 0;
  bool have_layers = false;
  double single_sup = 0, double_sup = 0;
  VectorXd taus;
  VectorXcd single_symbol;
  std::string to_json() const;
};

/// fredholm_verdict -> invert_and_verify -> restriction, staged.
LayerPipelineResult layer_pipeline(const OperatorSpecFile& spec);

}  // namespace cylcalc
