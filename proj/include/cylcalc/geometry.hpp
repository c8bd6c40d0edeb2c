#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cylcalc/fft.hpp"

namespace cylcalc {

/// Standard C^inf step: 0 for u <= 0, 1 for u >= 1, strictly monotone between.
double smooth_step(double u);

/// C^inf bump on (-1,1), peak value 1 at 0, identically 0 outside.
double smooth_bump(double r);

enum class End { left, right };

/// Equispaced grid on the circle of circumference L_circ (the link).
struct LinkGrid {
  int n_x = 0;
  double L_circ = 0;

  double h() const { return L_circ / n_x; }
  double x(int i) const { return i * h(); }
  /// Circle frequency of DFT index a, wrapped to [-n_x/2, n_x/2).
  double xi(int a) const {
    int w = ((a + n_x / 2) % n_x + n_x) % n_x - n_x / 2;
    return 2.0 * M_PI * w / L_circ;
  }
  /// Arc distance between grid indices.
  double arc(int i, int ip) const {
    int d = std::abs(i - ip) % n_x;
    d = std::min(d, n_x - d);
    return d * h();
  }
};

/// The discretized model manifold: circle times a truncated line.
/// Grid points are (x_i, t_j) with t_j = t_min + j*h_t covering [t_min, t_max).
/// Points with |t| >= R_inv belong to the straight ends; sections fed to the
/// operators must vanish within `margin` of t_min and t_max.
struct CylinderGrid {
  LinkGrid link;
  int n_t = 0;
  double t_min = 0, t_max = 0;
  double R_inv = 0;
  double margin = 0;

  double T() const { return t_max - t_min; }
  double h_t() const { return T() / n_t; }
  double t(int j) const { return t_min + j * h_t(); }
  /// Axial frequency of DFT index b, wrapped to [-n_t/2, n_t/2).
  double tau(int b) const {
    int w = ((b + n_t / 2) % n_t + n_t) % n_t - n_t / 2;
    return 2.0 * M_PI * w / T();
  }
  int n_points() const { return link.n_x * n_t; }
  int index(int i, int j) const { return i * n_t + j; }
  int i_of(int p) const { return p / n_t; }
  int j_of(int p) const { return p % n_t; }
  double quad_weight() const { return link.h() * h_t(); }

  /// Geodesic distance in the product metric (t treated as a true line).
  double dist(int p, int q) const {
    double a = link.arc(i_of(p), i_of(q));
    double dt = t(j_of(p)) - t(j_of(q));
    return std::hypot(a, dt);
  }

  bool in_margin_interior(int j) const {
    return t(j) >= t_min + margin && t(j) <= t_max - margin;
  }

  /// Index set of points allowed to carry test data.
  std::vector<int> margin_interior() const;
};

using GridPtr = std::shared_ptr<const CylinderGrid>;

/// Validates parameters and builds the grid. t_extent is the half-width:
/// t runs over [-t_extent, t_extent).
GridPtr build_grid(int n_x, double L_circ, int n_t, double t_extent, double R_inv,
                   double margin);

/// Cutoffs attached to a grid: eta (one per end), rho, and the kernel cutoff chi.
struct CutoffProfile {
  GridPtr grid;
  double chi_outer = 0;  // eps: chi = 0 beyond this distance
  double chi_inner = 0;  // eps': chi = 1 inside this distance

  /// eta for the chosen end: on the left, 1 for t <= -2 and 0 for t >= -1.
  double eta(End end, double t) const;
  /// rho < 0 everywhere, rho(t) = -|t| for |t| >= 1.
  double rho(double t) const;
  /// Diagonal cutoff as a function of distance.
  double chi(double d) const;
};

CutoffProfile default_cutoffs(const GridPtr& grid);
CutoffProfile make_cutoffs(const GridPtr& grid, double chi_inner, double chi_outer);

/// Square partition of unity out of width-2 bands centered at the integers:
/// sum_k phi_k(t)^2 = 1 at every grid point.
struct PartitionOfUnity {
  GridPtr grid;
  std::vector<int> centers;
  /// phi_k evaluated on the t-grid (values of phi, not phi^2).
  std::vector<VectorXd> phis;
};

PartitionOfUnity build_partition(const GridPtr& grid);

/// Grid sections are complex vectors of length rank * n_points, component-major.
VectorXcd sample_section(const CylinderGrid& g,
                         const std::function<Complex(double, double)>& f);

/// Axial translate (Phi_s u)(x,t) = u(x, t+s) with s an integer multiple of the
/// t-spacing. Requires u to vanish near the boundary it moves toward.
VectorXcd translate_section(const CylinderGrid& g, const VectorXcd& u, int steps);

/// L^2 norm with the grid quadrature weight.
double l2_norm(const CylinderGrid& g, const VectorXcd& u);

/// Limit at infinity of a section constant in t beyond R_u on the given end.
/// Throws if the tail varies by more than tol.
VectorXcd limit_section(const CylinderGrid& g, const VectorXcd& u, End end,
                        double R_u, double tol = 1e-12);

}  // namespace cylcalc
