#include "cylcalc/symbols.hpp"

#include <cmath>
#include <stdexcept>

#include "cylcalc/geometry.hpp"

namespace cylcalc {

namespace {

double bump_radius(const expr::NodePtr& n) {
  double r = 0;
  if (n->kind == expr::Kind::call && n->func == "bump" &&
      expr::uses_var(n->args[0], expr::Var::t)) {
    double lo = expr::eval(n->args[1], {}).real();
    double hi = expr::eval(n->args[2], {}).real();
    r = std::max(std::abs(lo), std::abs(hi));
  }
  for (const auto& a : n->args) r = std::max(r, bump_radius(a));
  return r;
}

}  // namespace

FullSymbol symbol_from_expression(const expr::NodePtr& ast, double order) {
  if (!expr::t_confined_to_bumps(ast))
    throw std::invalid_argument("symbol_from_expression: t must appear inside bump(...)");
  FullSymbol a;
  a.order = order;
  a.depends_x = expr::uses_var(ast, expr::Var::x);
  a.depends_t = expr::uses_var(ast, expr::Var::t);
  a.R_a = a.depends_t ? bump_radius(ast) : 0.0;
  a.poly = expr::poly_degrees(ast);
  if (a.poly && a.poly->first == 0 && a.poly->second == 0 && order != 0) a.poly.reset();
  a.eval = [ast](double x, double t, double xi, double tau) {
    return expr::eval(ast, {x, t, xi, tau});
  };
  return a;
}

FullSymbol symbol_from_function(std::function<Complex(double, double, double, double)> f,
                                double order, double R_a, bool dep_x, bool dep_t) {
  FullSymbol a;
  a.order = order;
  a.R_a = R_a;
  a.depends_x = dep_x;
  a.depends_t = dep_t;
  a.eval = std::move(f);
  return a;
}

FullSymbol order_reduction_symbol(double s, double t0) {
  FullSymbol a;
  a.order = s;
  a.R_a = 0;
  a.eval = [s, t0](double, double, double xi, double tau) -> Complex {
    return std::pow(t0 * t0 + xi * xi + tau * tau, s / 2.0);
  };
  if (s >= 0 && s == std::round(s) && int(std::round(s)) % 2 == 0) {
    int d = int(std::round(s));
    a.poly = std::make_pair(d, d);
  }
  return a;
}

FullSymbol symbol_product(const FullSymbol& a, const FullSymbol& b) {
  FullSymbol c;
  c.order = a.order + b.order;
  c.R_a = std::max(a.R_a, b.R_a);
  c.depends_x = a.depends_x || b.depends_x;
  c.depends_t = a.depends_t || b.depends_t;
  if (a.poly && b.poly)
    c.poly = std::make_pair(a.poly->first + b.poly->first, a.poly->second + b.poly->second);
  auto fa = a.eval, fb = b.eval;
  c.eval = [fa, fb](double x, double t, double xi, double tau) {
    return fa(x, t, xi, tau) * fb(x, t, xi, tau);
  };
  return c;
}

FullSymbol asymptotic_sum(const std::vector<FullSymbol>& components) {
  if (components.empty()) throw std::invalid_argument("asymptotic_sum: no components");
  double m = components[0].order;
  double R = components[0].R_a;
  for (size_t j = 1; j < components.size(); ++j) {
    if (std::abs(components[j].order - (m - double(j))) > 1e-12)
      throw std::invalid_argument("asymptotic_sum: orders must decrease by 1");
    if (std::abs(components[j].R_a - R) > 1e-12)
      throw std::invalid_argument("asymptotic_sum: components must share R");
  }
  // excision scales: lambda_j grows with the cosphere sup of a_{m-j}
  std::vector<double> lambda(components.size(), 1.0);
  for (size_t j = 0; j < components.size(); ++j) {
    double sup = 0;
    for (int q = 0; q < 64; ++q) {
      double th = 2 * M_PI * q / 64.0;
      Complex v = components[j].eval(0.3, 0.0, std::cos(th), std::sin(th));
      if (!std::isfinite(std::abs(v)))
        throw std::runtime_error("asymptotic_sum: divergent seminorm at component " +
                                 std::to_string(j));
      sup = std::max(sup, std::abs(v));
    }
    lambda[j] = j == 0 ? 0.0 : std::pow(2.0, double(j)) * (1.0 + sup);
  }
  auto comps = components;
  FullSymbol out;
  out.order = m;
  out.R_a = R;
  for (const auto& c : comps) {
    out.depends_x = out.depends_x || c.depends_x;
    out.depends_t = out.depends_t || c.depends_t;
  }
  out.eval = [comps, lambda](double x, double t, double xi, double tau) {
    double r = std::hypot(xi, tau);
    Complex s = 0;
    for (size_t j = 0; j < comps.size(); ++j) {
      double cut = j == 0 ? 1.0 : smooth_step(r / lambda[j] - 1.0);
      if (cut > 0) s += cut * comps[j].eval(x, t, xi, tau);
    }
    return s;
  };
  return out;
}

ClassicalSymbol classical_from_full(const FullSymbol& a, int n_components) {
  ClassicalSymbol c;
  c.order = a.order;
  c.R_a = a.R_a;
  c.N_terms = n_components;
  double m = a.order;
  auto f = a.eval;
  for (int j = 0; j < n_components; ++j) {
    // residual after subtracting previously extracted components
    auto prev = c.components;
    double mj = m - j;
    auto comp = [f, prev, m, mj](double x, double t, double wx, double wt) -> Complex {
      auto residual = [&](double lam) {
        Complex v = f(x, t, lam * wx, lam * wt);
        for (size_t q = 0; q < prev.size(); ++q)
          v -= prev[q](x, t, wx, wt) * std::pow(lam, m - double(q));
        return v / std::pow(lam, mj);
      };
      const double L0 = 1024.0;
      Complex v1 = residual(L0), v2 = residual(2 * L0);
      double scale = std::max({std::abs(v1), std::abs(v2), 1e-30});
      if (std::abs(v1 - v2) <= 1e-11 * scale) return v2;  // exactly homogeneous
      Complex v3 = residual(4 * L0);
      // Richardson on c0 + c1/lam + c2/lam^2 at lam = L0, 2 L0, 4 L0
      // solving the 3x3 Vandermonde in 1/lam analytically:
      Complex c0 = (v1 - 6.0 * v2 + 8.0 * v3) / 3.0;
      return c0;
    };
    c.components.push_back(comp);
  }
  return c;
}

EllipticityResult is_elliptic(const ClassicalSymbol& a, double tol_ell,
                              const CosphereSample& sample) {
  EllipticityResult r;
  double mn = std::numeric_limits<double>::infinity(), mx = 0;
  for (double xs : sample.x_samples)
    for (double ts : sample.t_samples)
      for (int q = 0; q < sample.n_angles; ++q) {
        double th = 2 * M_PI * q / sample.n_angles;
        double v = std::abs(a.components[0](xs, ts, std::cos(th), std::sin(th)));
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
  if (tol_ell <= 0) tol_ell = 1e-8 * mx;
  r.constant = mn;
  r.max_value = mx;
  r.elliptic = mn >= tol_ell;
  return r;
}

MatrixXcd SymbolMatrix::principal_at(double x, double t, double wx, double wt,
                                     double lambda) const {
  MatrixXcd M = MatrixXcd::Zero(spec.k, spec.k);
  for (int i = 0; i < spec.k; ++i)
    for (int j = 0; j < spec.k; ++j)
      if (blocks[i][j])
        M(i, j) = blocks[i][j]->components[0](x, t, wx, wt) *
                  std::pow(lambda, spec.block_order(i, j));
  return M;
}

SymbolMatrix adn_symbol_matrix(
    const std::vector<std::vector<std::optional<ClassicalSymbol>>>& blocks,
    const ADNOrderSpec& spec) {
  if (int(blocks.size()) != spec.k) throw std::invalid_argument("adn_symbol_matrix: size");
  for (int i = 0; i < spec.k; ++i) {
    if (int(blocks[i].size()) != spec.k)
      throw std::invalid_argument("adn_symbol_matrix: ragged rows");
    for (int j = 0; j < spec.k; ++j)
      if (blocks[i][j] &&
          std::abs(blocks[i][j]->order - spec.block_order(i, j)) > 1e-9)
        throw std::invalid_argument("adn_symbol_matrix: block (" + std::to_string(i) +
                                    "," + std::to_string(j) + ") order " +
                                    std::to_string(blocks[i][j]->order) +
                                    " != s_i + t_j");
  }
  SymbolMatrix S;
  S.spec = spec;
  S.blocks = blocks;
  // two-scale homogeneity identity Symb(lam w) = lam^[s] Symb(w) lam^[t]
  for (double lam : {2.0, 4.0}) {
    MatrixXcd A = S.principal_at(0.3, 0.0, 0.6, 0.8, lam);
    MatrixXcd B = S.principal_at(0.3, 0.0, 0.6, 0.8, 1.0);
    for (int i = 0; i < spec.k; ++i)
      for (int j = 0; j < spec.k; ++j)
        B(i, j) *= std::pow(lam, spec.s[i]) * std::pow(lam, spec.t[j]);
    if ((A - B).norm() > 1e-8 * (1.0 + B.norm()))
      throw std::runtime_error("adn_symbol_matrix: homogeneity scaling identity failed");
  }
  return S;
}

ADNEllipticityResult is_adn_elliptic(const SymbolMatrix& S, double tol_ell,
                                     const CosphereSample& sample) {
  ADNEllipticityResult r;
  double mn = std::numeric_limits<double>::infinity(), mx = 0, defect = 0;
  for (double xs : sample.x_samples)
    for (double ts : sample.t_samples)
      for (int q = 0; q < sample.n_angles; ++q) {
        double th = 2 * M_PI * q / sample.n_angles;
        double wx = std::cos(th), wt = std::sin(th);
        double d1 = std::abs(S.principal_at(xs, ts, wx, wt).determinant());
        mn = std::min(mn, d1);
        mx = std::max(mx, d1);
      }
  // lambda-independence of the verdict, asserted on two scales at a few angles
  double tot_s = 0, tot_t = 0;
  for (int i = 0; i < S.spec.k; ++i) tot_s += S.spec.s[i], tot_t += S.spec.t[i];
  for (int q = 0; q < 8; ++q) {
    double th = 2 * M_PI * (q + 0.37) / 8;
    double d1 = std::abs(S.principal_at(0.0, 0.0, std::cos(th), std::sin(th), 2.0)
                             .determinant());
    double d0 = std::abs(S.principal_at(0.0, 0.0, std::cos(th), std::sin(th), 1.0)
                             .determinant()) *
                std::pow(2.0, tot_s + tot_t);
    defect = std::max(defect, std::abs(d1 - d0) / (1.0 + d0));
  }
  if (tol_ell <= 0) tol_ell = 1e-8 * std::max(mx, 1e-300);
  r.min_det = mn;
  r.max_det = mx;
  r.scale_defect = defect;
  r.elliptic = mn >= tol_ell;
  return r;
}

double sampled_seminorm(const FullSymbol& a, int ax, int at, int bxi, int btau, double q) {
  auto deriv = [&](double x, double t, double xi, double tau) {
    // nested central differences
    double hx = 1e-3, ht = 1e-3, hxi = 1e-3 * (1 + std::hypot(xi, tau)),
           htau = hxi;
    std::function<Complex(int, int, int, int, double, double, double, double)> rec =
        [&](int kx, int kt, int kxi, int ktau, double xv, double tv, double xiv,
            double tauv) -> Complex {
      if (kx > 0)
        return (rec(kx - 1, kt, kxi, ktau, xv + hx, tv, xiv, tauv) -
                rec(kx - 1, kt, kxi, ktau, xv - hx, tv, xiv, tauv)) /
               (2 * hx);
      if (kt > 0)
        return (rec(kx, kt - 1, kxi, ktau, xv, tv + ht, xiv, tauv) -
                rec(kx, kt - 1, kxi, ktau, xv, tv - ht, xiv, tauv)) /
               (2 * ht);
      if (kxi > 0)
        return (rec(kx, kt, kxi - 1, ktau, xv, tv, xiv + hxi, tauv) -
                rec(kx, kt, kxi - 1, ktau, xv, tv, xiv - hxi, tauv)) /
               (2 * hxi);
      if (ktau > 0)
        return (rec(kx, kt, kxi, ktau - 1, xv, tv, xiv, tauv + htau) -
                rec(kx, kt, kxi, ktau - 1, xv, tv, xiv, tauv - htau)) /
               (2 * htau);
      return a.eval(xv, tv, xiv, tauv);
    };
    return rec(ax, at, bxi, btau, x, t, xi, tau);
  };
  double sup = 0;
  for (double xv : {0.0, 1.1, 2.3})
    for (double tv : {0.0, 0.8, -3.1})
      for (double r : {0.0, 1.0, 3.0, 9.0, 27.0})
        for (int qq = 0; qq < 8; ++qq) {
          double th = 2 * M_PI * (qq + 0.21) / 8;
          double xi = r * std::cos(th), tau = r * std::sin(th);
          double w = std::pow(1.0 + std::hypot(xi, tau), q - (bxi + btau));
          sup = std::max(sup, std::abs(deriv(xv, tv, xi, tau)) / w);
        }
  return sup;
}

}  // namespace cylcalc
