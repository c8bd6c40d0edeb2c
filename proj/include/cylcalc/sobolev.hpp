#pragma once

#include "cylcalc/geometry.hpp"
#include "cylcalc/quantize.hpp"

namespace cylcalc {

/// Diagonal Fourier-side Sobolev weight (1 + xi^2 + tau^2)^{s/2} on the full
/// grid; s = 0 is the identity.
struct SobolevWeight {
  GridPtr grid;
  double s = 0;
};

/// W_s u (componentwise for rank > 1).
VectorXcd apply_weight(const CylinderGrid& g, const VectorXcd& u, double s);

/// Fourier-weight Sobolev norm ||W_s u||_{L^2}.
double fourier_norm(const CylinderGrid& g, const VectorXcd& u, double s);

/// Covariant norm: l^2 combination of ||nabla^j u||_{L^2}, j <= k, with
/// spectral derivatives. Requires u to vanish in the truncation margin.
double covariant_norm(const CylinderGrid& g, const VectorXcd& u, int k);

/// Partition norm of Eq-equivalent form: band contributions through width-2
/// overlapping windows, band norms on zero-padded width-8 windows.
double partition_norm(const CylinderGrid& g, const PartitionOfUnity& pou,
                      const VectorXcd& u, double m, double R);

/// Weighted norm ||rho^{-k} u||_{H^s}.
double weighted_norm(const CylinderGrid& g, const CutoffProfile& cut,
                     const VectorXcd& u, int k, double s);

using ApplyFn = std::function<VectorXcd(const VectorXcd&)>;

/// Largest singular value of Pi A Pi estimated by power iteration on A^H A,
/// where Pi projects onto sections supported in the margin interior.
/// `apply_adj` must implement v -> A^H v.
double opnorm_projected(const ApplyFn& apply, const ApplyFn& apply_adj,
                        const CylinderGrid& g, int rank, int iters = 60,
                        double tol = 1e-8);

/// Convenience overload for dense operators.
double opnorm_projected(const MatrixXcd& A, const CylinderGrid& g, int rank,
                        int iters = 60, double tol = 1e-8);

/// Largest singular value of Pi W_{s_out} A W_{s_in}^{-1} Pi (the grid-scale
/// H^{s_in} -> H^{s_out} operator norm on margin-supported sections).
double opnorm_weighted(const ApplyFn& apply, const ApplyFn& apply_adj,
                       const CylinderGrid& g, int rank, double s_in, double s_out,
                       int iters = 60, double tol = 1e-8);

/// Grid-scale H^s -> H^{s-m} bound of P (m from the operator metadata).
double mapping_property_check(const OperatorMatrix& P, double s);

}  // namespace cylcalc
