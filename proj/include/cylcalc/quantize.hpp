#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cylcalc/geometry.hpp"
#include "cylcalc/symbols.hpp"

namespace cylcalc {

enum class CalcTag { inv, ess, smoothing_S, comp, none };

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

/// Dense operator over grid points with calculus metadata. The matrix acts
/// directly on point-value vectors; the distribution kernel is
/// k(p,q) = mat(p,q) / (h_x h_t).
struct OperatorMatrix {
  MatrixXcd mat;
  GridPtr grid;
  int rank = 1;
  double order = 0;
  double eps = kUnbounded;  // kernel support radius in the true metric
  double R = kUnbounded;    // translation-invariance radius
  CalcTag tag = CalcTag::none;
  /// Kernel is exactly a function of wrapped grid offsets (both directions).
  bool bicirculant = false;

  int dim() const { return rank * grid->n_points(); }
  Complex kernel(int p, int q) const { return mat(p, q) / grid->quad_weight(); }
};

/// Kernel values and the near-diagonal mask (pairs closer than one spacing).
struct KernelField {
  MatrixXcd values;
  GridPtr grid;
  int rank = 1;
  bool diagonal_mask(int p, int q) const {
    return grid->dist(p % grid->n_points(), q % grid->n_points()) <
           std::min(grid->link.h(), grid->h_t());
  }
};

KernelField kernel_of(const OperatorMatrix& P);
OperatorMatrix operator_from_kernel(const KernelField& K, double order, double eps,
                                    double R, CalcTag tag);

/// Cutoff quantization of a scalar symbol. Polynomial symbols produce the
/// exact lattice differential operator (unconstrained support); all others go
/// through the kernel-side chi-truncation, which gives support radius
/// chi_outer and invariance radius R_a + chi_outer.
OperatorMatrix quantize(const FullSymbol& a, const GridPtr& grid,
                        const CutoffProfile& chi);

/// Per-scale oscillatory-testing data on one ray through a base point.
struct ExtractionResult {
  std::vector<double> lambdas;
  VectorXcd values;      // e^{-i<x,eta>} (P e_eta)(x) per scale
  Complex c0 = 0;        // fitted leading coefficient at the declared order
  double top_scale = 0;
};

/// Applies P to windowed plane waves along the lattice ray (ray_a, ray_b)
/// (integer multiples of the base frequencies) and fits
/// v(lambda) = lambda^m (c0 + c1/lambda + c2/lambda^2).
/// Throws when no alias-free scale exists on the ray.
ExtractionResult oscillatory_symbol_extract(const OperatorMatrix& P, int i0, int j0,
                                            int ray_a, int ray_b,
                                            double alias_guard = 0.75);

/// Same, with P given as a matrix-free application (used for products).
ExtractionResult oscillatory_symbol_extract_apply(
    const std::function<VectorXcd(const VectorXcd&)>& apply, const CylinderGrid& g,
    double order, int i0, int j0, int ray_a, int ray_b, double alias_guard = 0.75);

/// Near-diagonal kernel asymptotics k(p, p + d w) ~ sum_j a_j d^{-n-m+j}
/// (log-augmented when -m is a positive integer).
struct KernelAsymptotics {
  double order = 0;
  int n_dim = 2;
  bool log_terms = false;
  std::vector<double> powers;             // exponents of the fitted basis
  std::vector<bool> with_log;             // basis entry carries ln d
  std::vector<VectorXcd> coefficients;    // per ray
  double residual = 0;                    // relative RMS over the fit window
  double invariance_defect = 0;           // coefficient drift between the ends
  double conditioning = 0;                // fit matrix condition estimate
};

/// Fits the classical kernel expansion along grid-aligned rays.
/// Throws (structured failure) when the relative residual exceeds `max_residual`.
KernelAsymptotics kernel_asymptotics_fit(const OperatorMatrix& P, double claimed_order,
                                         int n_fit = 3, double max_residual = 0.25);

/// Operator on a union of vertical lines N = N_inf x (t-grid); the matrix acts
/// on stacked line values, index = line * n_t + j, kernel = mat / h_t.
struct RestrictedOperator {
  MatrixXcd mat;
  GridPtr grid;
  std::vector<int> x_indices;
  double order = 0;
  double eps = kUnbounded;
  double R = kUnbounded;
  CalcTag tag = CalcTag::none;
  bool circulant = false;  // kernel a function of the wrapped t-offset

  int dim() const { return int(x_indices.size()) * grid->n_t; }
};

/// Restriction of the kernel of P to N x N. Requires order(P) < -codim.
RestrictedOperator restrict_kernel(const OperatorMatrix& P,
                                   const std::vector<int>& x_indices,
                                   double order_margin = 0.0);

/// 1-D analogue of kernel_asymptotics_fit for restricted operators.
KernelAsymptotics kernel_asymptotics_fit_line(const RestrictedOperator& S,
                                              double claimed_order, int n_fit = 3,
                                              double max_residual = 0.25);

void write_kernel_csv(const std::string& path, const MatrixXcd& k);
void write_kernel_bin(const std::string& path, const MatrixXcd& k);
MatrixXcd read_kernel_bin(const std::string& path);

}  // namespace cylcalc
