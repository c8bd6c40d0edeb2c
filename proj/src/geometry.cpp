#include "cylcalc/geometry.hpp"

#include <cmath>

namespace cylcalc {

double smooth_step(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  double a = std::exp(-1.0 / u);
  double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

double smooth_bump(double r) {
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

std::vector<int> CylinderGrid::margin_interior() const {
  std::vector<int> idx;
  for (int i = 0; i < link.n_x; ++i)
    for (int j = 0; j < n_t; ++j)
      if (in_margin_interior(j)) idx.push_back(index(i, j));
  return idx;
}

GridPtr build_grid(int n_x, double L_circ, int n_t, double t_extent, double R_inv,
                   double margin) {
  if (n_x < 4 || n_x % 2 != 0)
    throw std::invalid_argument("build_grid: n_x must be even and >= 4");
  if (L_circ <= 0 || n_t <= 0 || t_extent <= 0)
    throw std::invalid_argument("build_grid: sizes must be positive");
  if (R_inv <= 2.0)
    throw std::invalid_argument("build_grid: R_inv must exceed 2 (the eta transition band)");
  if (margin <= 0) throw std::invalid_argument("build_grid: margin must be positive");
  if (R_inv + margin >= t_extent)
    throw std::invalid_argument("build_grid: R_inv + margin must be < t_extent");
  auto g = std::make_shared<CylinderGrid>();
  g->link = LinkGrid{n_x, L_circ};
  g->n_t = n_t;
  g->t_min = -t_extent;
  g->t_max = t_extent;
  g->R_inv = R_inv;
  g->margin = margin;
  return g;
}

double CutoffProfile::eta(End end, double tv) const {
  double s = end == End::left ? -tv : tv;
  // 1 for s >= 2, 0 for s <= 1
  return smooth_step(s - 1.0);
}

double CutoffProfile::rho(double tv) const {
  double a = std::abs(tv);
  if (a >= 1.0) return -a;
  // smooth even interpolation staying <= -1/2; exactly -|t| near |t| = 1
  double s = smooth_step((a - 0.5) / 0.5);
  return -(1.0 + (a - 1.0) * s);
}

double CutoffProfile::chi(double d) const {
  if (d <= chi_inner) return 1.0;
  if (d >= chi_outer) return 0.0;
  return 1.0 - smooth_step((d - chi_inner) / (chi_outer - chi_inner));
}

CutoffProfile default_cutoffs(const GridPtr& grid) {
  return make_cutoffs(grid, grid->R_inv / 4.0, grid->R_inv / 2.0);
}

CutoffProfile make_cutoffs(const GridPtr& grid, double chi_inner, double chi_outer) {
  if (!(0 < chi_inner && chi_inner < chi_outer))
    throw std::invalid_argument("make_cutoffs: need 0 < inner < outer");
  CutoffProfile c;
  c.grid = grid;
  c.chi_inner = chi_inner;
  c.chi_outer = chi_outer;
  return c;
}

PartitionOfUnity build_partition(const GridPtr& grid) {
  PartitionOfUnity p;
  p.grid = grid;
  int c_lo = int(std::floor(grid->t_min));
  int c_hi = int(std::ceil(grid->t_max));
  VectorXd total = VectorXd::Zero(grid->n_t);
  std::vector<VectorXd> raw;
  for (int c = c_lo; c <= c_hi; ++c) {
    VectorXd w(grid->n_t);
    for (int j = 0; j < grid->n_t; ++j) w[j] = smooth_bump(grid->t(j) - c);
    if (w.maxCoeff() <= 0) continue;
    p.centers.push_back(c);
    raw.push_back(w);
    total += w;
  }
  for (auto& w : raw) {
    VectorXd phi(grid->n_t);
    for (int j = 0; j < grid->n_t; ++j) phi[j] = std::sqrt(w[j] / total[j]);
    p.phis.push_back(phi);
  }
  return p;
}

VectorXcd sample_section(const CylinderGrid& g,
                         const std::function<Complex(double, double)>& f) {
  VectorXcd u(g.n_points());
  for (int i = 0; i < g.link.n_x; ++i)
    for (int j = 0; j < g.n_t; ++j) u[g.index(i, j)] = f(g.link.x(i), g.t(j));
  return u;
}

VectorXcd translate_section(const CylinderGrid& g, const VectorXcd& u, int steps) {
  // (Phi_s u)(x,t) = u(x, t+s) with s = steps * h_t; data moves toward
  // t_min for steps > 0.   The vacated band must have held zeros.
  int n = g.n_points();
  if (u.size() % n != 0) throw std::invalid_argument("translate_section: size mismatch");
  int rank = int(u.size()) / n;
  double tol = 1e-13 * (u.size() ? u.cwiseAbs().maxCoeff() : 0.0);
  int lo, hi;  // j-range of source samples that fall off the grid
  if (steps >= 0) {
    lo = g.n_t - steps;
    hi = g.n_t;
  } else {
    lo = 0;
    hi = -steps;
  }
  for (int c = 0; c < rank; ++c)
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = lo; j < hi; ++j)
        if (std::abs(u[c * n + g.index(i, j)]) > tol)
          throw std::runtime_error(
              "translate_section: support violation in t-band [" +
              std::to_string(g.t(lo)) + ", " + std::to_string(g.t(hi - 1)) + "]");
  VectorXcd v = VectorXcd::Zero(u.size());
  for (int c = 0; c < rank; ++c)
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j) {
        int js = j + steps;
        if (js >= 0 && js < g.n_t) v[c * n + g.index(i, j)] = u[c * n + g.index(i, js)];
      }
  return v;
}

double l2_norm(const CylinderGrid& g, const VectorXcd& u) {
  return u.norm() * std::sqrt(g.quad_weight());
}

VectorXcd limit_section(const CylinderGrid& g, const VectorXcd& u, End end, double R_u,
                        double tol) {
  int n = g.n_points();
  int rank = int(u.size()) / n;
  VectorXcd out(rank * g.link.n_x);
  double worst = 0;
  for (int c = 0; c < rank; ++c)
    for (int i = 0; i < g.link.n_x; ++i) {
      Complex ref{};
      bool have = false;
      for (int j = 0; j < g.n_t; ++j) {
        double tv = g.t(j);
        bool deep = end == End::left ? tv <= -R_u : tv >= R_u;
        if (!deep) continue;
        Complex v = u[c * n + g.index(i, j)];
        if (!have) {
          ref = v;
          have = true;
        } else {
          worst = std::max(worst, std::abs(v - ref));
        }
      }
      if (!have) throw std::runtime_error("limit_section: no grid points beyond R_u");
      out[c * g.link.n_x + i] = ref;
    }
  if (worst > tol)
    throw std::runtime_error("limit_section: tail varies by " + std::to_string(worst));
  return out;
}

}  // namespace cylcalc
