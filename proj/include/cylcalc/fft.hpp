#pragma once

#include <Eigen/Dense>
#include <complex>

namespace cylcalc {

using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Forward DFT of a 1-D sequence: out[b] = sum_j in[j] exp(-2*pi*i*b*j/n).
VectorXcd dft(const VectorXcd& in);

/// Inverse DFT with the 1/n factor: out[j] = (1/n) sum_b in[b] exp(+2*pi*i*b*j/n).
VectorXcd idft(const VectorXcd& in);

/// Row-column 2-D forward DFT of an n0 x n1 array (no normalization).
MatrixXcd dft2(const MatrixXcd& in);

/// Row-column 2-D inverse DFT with the 1/(n0*n1) factor.
MatrixXcd idft2(const MatrixXcd& in);

/// Caps the worker-thread count used by Eigen products (honors CYLCALC_THREADS).
void configure_threads();

}  // namespace cylcalc
