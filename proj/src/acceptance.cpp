#include "cylcalc/acceptance.hpp"

#include <iostream>
#include <random>
#include <sstream>

#include "cylcalc/layerpot.hpp"

namespace cylcalc {

namespace {

struct Ctx {
  GridPtr grid;
  CutoffProfile cut;
};

Ctx default_ctx() {
  Ctx c;
  c.grid = build_grid(16, 2 * M_PI, 256, 32.0, 8.0, 8.0);
  c.cut = default_cutoffs(c.grid);
  return c;
}

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(3);
  o << v;
  return o.str();
}

using Criterion = CriterionResult (*)();

// 1. quantize(1) = identity; quantize(i tau) reproduces the multiplier
CriterionResult c1() {
  CriterionResult r{1, "quantization identity and axial multiplier", false, ""};
  Ctx c = default_ctx();
  const auto& g = *c.grid;
  OperatorMatrix I1 = quantize(symbol_from_expression(expr::parse("1"), 0.0), c.grid, c.cut);
  double err_id = (I1.mat - MatrixXcd::Identity(I1.dim(), I1.dim())).cwiseAbs().maxCoeff();

  OperatorMatrix Dt =
      quantize(symbol_from_expression(expr::parse("i * tau"), 1.0), c.grid, c.cut);
  double worst = 0;
  for (int b : {8, 16, 48}) {
    double tau0 = g.tau(b);
    VectorXcd u(g.n_points());
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j) {
        double t = g.t(j);
        double W = 1.0 - smooth_step((std::abs(t) - 14.0) / 8.0);
        u[g.index(i, j)] = std::exp(Complex(0, tau0 * t)) * W;
      }
    VectorXcd v = Dt.mat * u;
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j)
        if (std::abs(g.t(j)) <= 10.0)
          worst = std::max(worst,
                           std::abs(v[g.index(i, j)] - Complex(0, tau0) * u[g.index(i, j)]) /
                               std::abs(tau0));
  }
  r.pass = err_id <= 1e-12 && worst <= 1e-6;
  r.detail = "|q(1)-I|=" + fmt(err_id) + ", multiplier rel err=" + fmt(worst);
  return r;
}

FullSymbol random_classical(std::mt19937_64& rng, double m) {
  std::uniform_real_distribution<double> U(0, 1);
  std::normal_distribution<double> N01;
  double c0 = N01(rng), c1v = N01(rng), c2 = N01(rng);
  double amp = 0.2 * U(rng);
  auto f = [c0, c1v, c2, amp, m](double x, double t, double xi, double tau) -> Complex {
    Complex p = c0 * xi * xi + c1v * xi * tau + c2 * tau * tau;
    double mod = 1.0 + amp * std::cos(x) * smooth_bump(t / 6.0);
    return mod * p * std::pow(1.0 + xi * xi + tau * tau, (m - 2.0) / 2.0);
  };
  return symbol_from_function(f, m, 6.0, true, true);
}

// 2. symbol multiplicativity under oscillatory extraction
CriterionResult c2() {
  CriterionResult r{2, "principal-symbol multiplicativity (10 random pairs)", false, ""};
  Ctx c = default_ctx();
  const auto& g = *c.grid;
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> U(-2, 2);
  const std::vector<std::pair<int, int>> rays{{1, 0}, {0, 8},  {0, 16}, {1, 4},
                                              {1, -4}, {1, 12}, {1, -12}, {1, 8}};
  int i0 = 3, j0 = g.n_t / 2 + 7;
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    double mP = U(rng), mQ = U(rng);
    OperatorMatrix P = quantize(random_classical(rng, mP), c.grid, c.cut);
    OperatorMatrix Q = quantize(random_classical(rng, mQ), c.grid, c.cut);
    std::vector<Complex> cPQ, prod;
    for (auto [ra, rb] : rays) {
      auto ePQ = oscillatory_symbol_extract_apply(
          [&](const VectorXcd& v) { return VectorXcd(P.mat * (Q.mat * v)); }, g,
          mP + mQ, i0, j0, ra, rb);
      auto eP = oscillatory_symbol_extract(P, i0, j0, ra, rb);
      auto eQ = oscillatory_symbol_extract(Q, i0, j0, ra, rb);
      cPQ.push_back(ePQ.c0);
      prod.push_back(eP.c0 * eQ.c0);
    }
    double sup = 0;
    for (auto& v : prod) sup = std::max(sup, std::abs(v));
    for (size_t q = 0; q < rays.size(); ++q)
      worst = std::max(worst, std::abs(cPQ[q] - prod[q]) / std::max(sup, 1e-300));
  }
  r.pass = worst <= 2e-2;
  r.detail = "max sup-relative defect " + fmt(worst);
  return r;
}

LimitOperator random_invariant(std::mt19937_64& rng, const Ctx& c, double eps_T) {
  const auto& g = *c.grid;
  std::normal_distribution<double> N01;
  LimitOperator T;
  T.link = g.link;
  T.w_link = g.link.h();
  T.n_u = g.n_t;
  T.h_u = g.h_t();
  T.order = 0;
  T.eps = eps_T;
  T.tag = CalcTag::inv;
  T.C.assign(g.n_t, MatrixXcd());
  int nx = g.link.n_x;
  struct Mode {
    int ax, bx;
    Complex amp;
    double width;
  };
  std::vector<Mode> modes;
  for (int q = 0; q < 3; ++q)
    modes.push_back({int(rng() % 5) - 2, int(rng() % 5) - 2,
                     Complex(N01(rng), N01(rng)), 0.4 + 0.5 * (q + 1)});
  for (int k = 0; k < g.n_t; ++k) {
    double u = T.u(k);
    if (std::abs(u) > eps_T) continue;
    MatrixXcd M = MatrixXcd::Zero(nx, nx);
    for (auto& mo : modes) {
      double prof = smooth_bump(u / eps_T) * std::exp(-u * u / (2 * mo.width));
      for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nx; ++b)
          M(a, b) += mo.amp * prof *
                     std::exp(Complex(0, mo.ax * g.link.x(a) - mo.bx * g.link.x(b)));
    }
    T.C[k] = M;
  }
  return T;
}

// 3. In o s0 = id; exact decomposition
CriterionResult c3() {
  CriterionResult r{3, "limit-operator section and decomposition", false, ""};
  Ctx c = default_ctx();
  std::mt19937_64 rng(7);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    LimitOperator T = random_invariant(rng, c, 3.0);
    OperatorMatrix S = s0_extend(T, c.grid, End::left);
    LimitOperator back = limit_operator(S, End::left);
    double scale = 0, diff = 0;
    for (int k = 0; k < T.n_u; ++k) {
      if (T.C[k].size()) scale = std::max(scale, T.C[k].cwiseAbs().maxCoeff());
      MatrixXcd a = T.C[k].size() ? T.C[k] : MatrixXcd();
      MatrixXcd b = back.C[k].size() ? back.C[k] : MatrixXcd();
      if (a.size() && b.size())
        diff = std::max(diff, (a - b).cwiseAbs().maxCoeff());
      else if (a.size())
        diff = std::max(diff, a.cwiseAbs().maxCoeff());
      else if (b.size())
        diff = std::max(diff, b.cwiseAbs().maxCoeff());
    }
    worst = std::max(worst, diff / std::max(scale, 1e-300));
  }

  // decomposition of a generic quantized operator plus a compact bump
  FullSymbol a = symbol_from_function(
      [](double x, double t, double xi, double tau) -> Complex {
        return (1.0 + 0.3 * std::cos(x) * smooth_bump(t / 5.0)) /
               (1.0 + xi * xi + tau * tau);
      },
      -2.0, 5.0, true, true);
  OperatorMatrix P = quantize(a, c.grid, c.cut);
  auto D = decompose(P);
  double exact = (P.mat - D.invariant_part.mat - D.compact_part.mat).cwiseAbs().maxCoeff();
  bool radius_ok = D.compact_support_radius <= P.R + P.eps + 1.0;
  r.pass = worst <= 1e-10 && exact <= 1e-13 && radius_ok;
  r.detail = "In(s0 T) defect " + fmt(worst) + ", reassembly " + fmt(exact) +
             ", compact radius " + fmt(D.compact_support_radius);
  return r;
}

// 4. indicial diagonalization of the shifted cylinder Laplacian
CriterionResult c4() {
  CriterionResult r{4, "indicial diagonalization (exact on the lattice)", false, ""};
  Ctx c = default_ctx();
  const auto& g = *c.grid;
  double cshift = 0.7;
  OperatorMatrix T = quantize(
      symbol_from_expression(expr::parse("xi^2 + tau^2 + 0.7"), 2.0), c.grid, c.cut);
  LimitOperator L = limit_operator(T, End::left);
  VectorXd taus(g.n_t);
  for (int b = 0; b < g.n_t; ++b) taus[b] = g.tau(b);
  auto F = indicial_family(L, taus);
  double worst = 0;
  for (int b = 0; b < g.n_t; ++b) {
    Eigen::ComplexEigenSolver<MatrixXcd> es(F.mats[b]);
    VectorXd got = es.eigenvalues().real();
    std::sort(got.data(), got.data() + got.size());
    VectorXd want(g.link.n_x);
    for (int m = 0; m < g.link.n_x; ++m) {
      double xi = g.link.xi(m);
      want[m] = taus[b] * taus[b] + xi * xi + cshift;
    }
    std::sort(want.data(), want.data() + want.size());
    for (int m = 0; m < g.link.n_x; ++m)
      worst = std::max(worst, std::abs(got[m] - want[m]) / want[m]);
  }
  r.pass = worst <= 1e-10;
  r.detail = "max rel eigenvalue error " + fmt(worst);
  return r;
}

ADNSystem laplacian_system(const Ctx& c, double cshift) {
  std::ostringstream e;
  e.precision(17);
  e << "xi^2 + tau^2 + (" << cshift << ")";
  FullSymbol a = symbol_from_expression(expr::parse(e.str()), 2.0);
  ADNSystem sys;
  sys.spec = ADNOrderSpec{1, {0.0}, {2.0}};
  sys.grid = c.grid;
  sys.blocks.assign(1, {quantize(a, c.grid, c.cut)});
  sys.symb.spec = sys.spec;
  sys.symb.blocks.assign(1, {classical_from_full(a, 1)});
  return sys;
}

// 5. Fredholm verdict flip across the spectral threshold
CriterionResult c5() {
  CriterionResult r{5, "Fredholm verdict flip", false, ""};
  Ctx c = default_ctx();
  VectorXd taus = default_tau_grid(*c.grid);
  bool ok = true;
  std::string det;
  for (double cs : {0.1, 1.0, 10.0}) {
    auto rep = fredholm_verdict(laplacian_system(c, cs), 0.0, taus);
    ok = ok && rep.verdict;
    det += "c=" + fmt(cs) + (rep.verdict ? " ok" : " WRONG") + "; ";
  }
  for (double cs : {0.0, -0.5}) {
    auto rep = fredholm_verdict(laplacian_system(c, cs), 0.0, taus);
    ok = ok && !rep.verdict && rep.adn_elliptic;
    det += "c=" + fmt(cs) + (!rep.verdict ? " not-Fredholm" : " WRONG") + "; ";
    if (cs == -0.5) {
      double spacing = taus[1] - taus[0];
      auto& nt = rep.per_end[0].noninvertible_taus;
      double lo = 1e9, hi = -1e9;
      for (double v : nt) lo = std::min(lo, v), hi = std::max(hi, v);
      bool endpoints = !nt.empty() && std::abs(lo + std::sqrt(0.5)) <= spacing &&
                       std::abs(hi - std::sqrt(0.5)) <= spacing;
      ok = ok && endpoints;
      det += "endpoints " + fmt(lo) + "/" + fmt(hi) + "; ";
    }
  }
  r.pass = ok;
  r.detail = det;
  return r;
}

ClassicalSymbol homogeneous_entry(double order,
                                  std::function<Complex(double, double)> on_sphere) {
  ClassicalSymbol s;
  s.order = order;
  s.N_terms = 1;
  s.components.push_back([on_sphere](double, double, double wx, double wt) {
    return on_sphere(wx, wt);
  });
  return s;
}

// 6. ADN ellipticity: Stokes-type accepted, degenerate pair rejected
CriterionResult c6() {
  CriterionResult r{6, "ADN ellipticity (Stokes-type vs counterexample)", false, ""};
  ADNOrderSpec spec{3, {1, 1, 0}, {1, 1, 0}};
  std::vector<std::vector<std::optional<ClassicalSymbol>>> blocks(
      3, std::vector<std::optional<ClassicalSymbol>>(3));
  auto z2 = [](double wx, double wt) { return Complex(wx * wx + wt * wt, 0); };
  blocks[0][0] = homogeneous_entry(2, z2);
  blocks[1][1] = homogeneous_entry(2, z2);
  blocks[0][2] = homogeneous_entry(1, [](double wx, double) { return Complex(0, wx); });
  blocks[1][2] = homogeneous_entry(1, [](double, double wt) { return Complex(0, wt); });
  blocks[2][0] = homogeneous_entry(1, [](double wx, double) { return Complex(0, -wx); });
  blocks[2][1] = homogeneous_entry(1, [](double, double wt) { return Complex(0, -wt); });
  auto S = adn_symbol_matrix(blocks, spec);
  auto ell = is_adn_elliptic(S);

  ADNOrderSpec spec2{2, {1, 0}, {1, 0}};
  std::vector<std::vector<std::optional<ClassicalSymbol>>> blocks2(
      2, std::vector<std::optional<ClassicalSymbol>>(2));
  blocks2[0][0] = homogeneous_entry(2, z2);
  blocks2[0][1] = homogeneous_entry(1, [](double wx, double) { return Complex(0, wx); });
  blocks2[1][0] = homogeneous_entry(1, [](double wx, double) { return Complex(0, -wx); });
  auto S2 = adn_symbol_matrix(blocks2, spec2);
  auto ell2 = is_adn_elliptic(S2);

  r.pass = ell.elliptic && std::abs(ell.min_det - 1.0) <= 1e-8 && !ell2.elliptic &&
           ell2.min_det <= 1e-8;
  r.detail = "stokes min|det|=" + fmt(ell.min_det) +
             ", counterexample min|det|=" + fmt(ell2.min_det);
  return r;
}

// 7. order reduction and spectral invariance of its inverse
CriterionResult c7() {
  CriterionResult r{7, "order reduction: bisected t0 and inverse membership", false, ""};
  Ctx c = default_ctx();
  auto red = order_reduction_auto(2.0, c.grid, c.cut, 0.5);
  bool res_ok = red.certified && std::max(red.residual_left, red.residual_right) <= 0.5;
  auto symb = classical_from_full(order_reduction_symbol(2.0, red.t0), 1);
  auto inv = invert_and_verify(red.op, symb, 0.0);
  bool decay_ok = true;
  for (double e : inv.membership.decay_exponents) decay_ok = decay_ok && e >= 4.0;
  r.pass = res_ok && decay_ok && inv.membership.verdict;
  std::string exps;
  for (double e : inv.membership.decay_exponents) exps += fmt(e) + " ";
  r.detail = "t0=" + fmt(red.t0) + ", residuals " + fmt(red.residual_right) + "/" +
             fmt(red.residual_left) + ", exponents " + exps;
  return r;
}

// 8. spectral invariance of the inverse of 1 - Delta
CriterionResult c8() {
  CriterionResult r{8, "spectral invariance of (1 - Delta)^{-1}", false, ""};
  Ctx c = default_ctx();
  FullSymbol a = symbol_from_expression(expr::parse("1 + xi^2 + tau^2"), 2.0);
  OperatorMatrix T = quantize(a, c.grid, c.cut);
  auto inv = invert_and_verify(T, classical_from_full(a, 1), 0.0);
  bool slopes_ok = true;
  double prev = 0;
  for (size_t p = 0; p < inv.membership.decay_exponents.size(); ++p) {
    double e = inv.membership.decay_exponents[p];
    if (p + 1 == inv.membership.decay_exponents.size() || p >= 3)
      slopes_ok = slopes_ok && (e > 6.0 || !std::isfinite(e));
    if (p > 0 && std::isfinite(e) && std::isfinite(prev))
      slopes_ok = slopes_ok && e >= prev - 0.5;
    prev = e;
  }
  LimitOperator Li = limit_operator(inv.inverse, End::left);
  LimitOperator Lt = limit_operator(T, End::left);
  LimitOperator prod = limit_compose(Li, Lt);
  double idres = 0;
  for (int b = 0; b < prod.n_u; ++b) {
    double tau = 2 * M_PI * b / (prod.n_u * prod.h_u);
    MatrixXcd M = prod.indicial(tau) -
                  MatrixXcd::Identity(prod.dim_link(), prod.dim_link());
    idres = std::max(idres, M.cwiseAbs().maxCoeff());
  }
  r.pass = inv.membership.verdict && slopes_ok && idres <= 1e-6;
  r.detail = "membership " + std::string(inv.membership.verdict ? "ok" : "FAIL") +
             ", In-product defect " + fmt(idres);
  return r;
}

OperatorMatrix compact_order_minus_one(const GridPtr& grid, const CutoffProfile& cut) {
  FullSymbol a = symbol_from_function(
      [](double, double, double xi, double tau) -> Complex {
        return std::pow(1.0 + xi * xi + tau * tau, -0.5);
      },
      -1.0, 0.0, false, false);
  OperatorMatrix P = quantize(a, grid, cut);
  const auto& g = *grid;
  for (int p = 0; p < P.dim(); ++p) {
    double wp = smooth_bump(g.t(g.j_of(p)) / 6.0);
    for (int q = 0; q < P.dim(); ++q)
      P.mat(p, q) *= wp * smooth_bump(g.t(g.j_of(q)) / 6.0);
  }
  P.tag = CalcTag::comp;
  P.R = 6.0 + P.eps;
  return P;
}

// 9. compactness trichotomy and resolution refinement
CriterionResult c9() {
  CriterionResult r{9, "compactness trichotomy", false, ""};
  Ctx c = default_ctx();
  OperatorMatrix Pc = compact_order_minus_one(c.grid, c.cut);
  auto rep1 = compactness_check(Pc);

  std::mt19937_64 rng(11);
  LimitOperator T = random_invariant(rng, c, 3.0);
  OperatorMatrix Ps = s0_extend(T, c.grid, End::left);
  Ps.order = 0;
  auto rep2 = compactness_check(Ps);

  OperatorMatrix Z = Pc;
  Z.mat.setZero();
  auto rep3 = compactness_check(Z);

  // tails decrease when n_t doubles
  auto fine_grid = build_grid(16, 2 * M_PI, 512, 32.0, 8.0, 8.0);
  OperatorMatrix Pf = compact_order_minus_one(fine_grid, default_cutoffs(fine_grid));
  auto rep4 = compactness_check(Pf);
  bool tails = true;
  for (size_t q = 0; q < rep1.singular_tail.size() && q < rep4.singular_tail.size(); ++q)
    tails = tails && rep4.singular_tail[q] <= rep1.singular_tail[q] * 1.05;

  r.pass = rep1.verdict && !rep2.verdict && rep3.verdict && tails;
  r.detail = std::string("compact:") + (rep1.verdict ? "ok" : "FAIL") +
             " noncompact:" + (!rep2.verdict ? "ok" : "FAIL") +
             " zero:" + (rep3.verdict ? "ok" : "FAIL") + " tails:" +
             (tails ? "decrease" : "FAIL");
  return r;
}

// 10. restriction theorem
CriterionResult c10() {
  CriterionResult r{10, "kernel restriction to a vertical line", false, ""};
  Ctx c = default_ctx();
  FullSymbol a = symbol_from_function(
      [](double, double, double xi, double tau) -> Complex {
        return std::pow(1.0 + xi * xi + tau * tau, -1.5);
      },
      -3.0, 0.0, false, false);
  OperatorMatrix P = quantize(a, c.grid, c.cut);
  Submanifold N;
  N.x_indices = {0};
  RestrictedOperator S = restrict_kernel(P, N.x_indices);
  auto fit = kernel_asymptotics_fit_line(S, -2.0, 3, 0.05);
  double defect = restriction_limit_defect(P, S, N);
  r.pass = fit.residual <= 0.05 && defect <= 1e-6;
  r.detail = "fit residual " + fmt(fit.residual) + ", In-compat defect " + fmt(defect);
  return r;
}

OperatorSpecFile layer_spec() {
  OperatorSpecFile f;
  f.n_x = 8192;
  f.L_circ = 8 * M_PI;
  f.n_t = 256;
  f.t_extent = 32;
  f.R_inv = 8;
  f.margin = 8;
  f.k = 1;
  f.s = {0.0};
  f.t = {2.0};
  f.symbols.assign(1, {expr::parse("1 + xi^2 + tau^2")});
  f.x_indices = {0};
  return f;
}

// 11. single layer tau-symbol against the K0 line-restriction oracle
CriterionResult c11() {
  CriterionResult r{11, "single layer potential vs K0 oracle", false, ""};
  auto res = layer_pipeline(layer_spec());
  if (!res.ok) {
    r.detail = "pipeline failed at " + res.stage + ": " + res.failure;
    return r;
  }
  double tau_ny = M_PI / (64.0 / 256.0);
  double worst = 0;
  for (int b = 0; b < res.taus.size(); ++b) {
    double tau = res.taus[b];
    if (std::abs(tau) < tau_ny / 3 || std::abs(tau) > 2 * tau_ny / 3) continue;
    double oracle = 1.0 / (2.0 * std::sqrt(1.0 + tau * tau));
    worst = std::max(worst, std::abs(res.single_symbol[b].real() - oracle) / oracle);
  }
  r.pass = worst <= 0.01;
  r.detail = "mid-band max rel err " + fmt(worst);
  return r;
}

// 12. double layer vanishes on the straight line
CriterionResult c12() {
  CriterionResult r{12, "double layer vanishing by symmetry", false, ""};
  auto res = layer_pipeline(layer_spec());
  if (!res.ok) {
    r.detail = "pipeline failed at " + res.stage;
    return r;
  }
  double rel = res.double_sup / std::max(res.single_sup, 1e-300);
  r.pass = rel <= 1e-6;
  r.detail = "sup |K_P| / sup |S_P| = " + fmt(rel);
  return r;
}

// 13. Sobolev norm equivalence
CriterionResult c13() {
  CriterionResult r{13, "partition vs Fourier Sobolev norms", false, ""};
  Ctx c = default_ctx();
  const auto& g = *c.grid;
  auto pou = build_partition(c.grid);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> N01;
  double lo = 1e9, hi = 0;
  for (int trial = 0; trial < 50; ++trial) {
    VectorXcd u = VectorXcd::Zero(g.n_points());
    MatrixXcd A = MatrixXcd::Zero(g.n_t, g.link.n_x);
    int nm = 3 + int(rng() % 9);
    for (int q = 0; q < nm; ++q) {
      int bx = int(rng() % g.link.n_x);
      int bt = int(rng() % 81) - 40;
      A((bt % g.n_t + g.n_t) % g.n_t, bx) = Complex(N01(rng), N01(rng));
    }
    MatrixXcd f = idft2(A);
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j) {
        double W = smooth_bump(g.t(j) / 23.0);
        u[g.index(i, j)] = f(j, i) * W;
      }
    for (double m : {0.0, 1.0, 2.0}) {
      double pn = partition_norm(g, pou, u, m, g.R_inv);
      double fn = fourier_norm(g, u, m);
      double ratio = pn / fn;
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  r.pass = lo >= 0.25 && hi <= 4.0;
  r.detail = "ratio range [" + fmt(lo) + ", " + fmt(hi) + "]";
  return r;
}

expr::NodePtr fuzz_expr(std::mt19937_64& rng, int depth) {
  using namespace expr;
  std::uniform_real_distribution<double> U(0.1, 3.0);
  if (depth <= 0 || rng() % 4 == 0) {
    switch (rng() % 4) {
      case 0: return number(std::round(U(rng) * 16) / 16.0);
      case 1: return variable(Var::xi);
      case 2: return variable(Var::tau);
      default: return variable(Var::x);
    }
  }
  switch (rng() % 7) {
    case 0: return binary(Kind::add, fuzz_expr(rng, depth - 1), fuzz_expr(rng, depth - 1));
    case 1: return binary(Kind::sub, fuzz_expr(rng, depth - 1), fuzz_expr(rng, depth - 1));
    case 2: return binary(Kind::mul, fuzz_expr(rng, depth - 1), fuzz_expr(rng, depth - 1));
    case 3: return binary(Kind::div, fuzz_expr(rng, depth - 1),
                          binary(Kind::add, number(2.0),
                                 binary(Kind::mul, fuzz_expr(rng, depth - 1),
                                        fuzz_expr(rng, depth - 1))));
    case 4: return binary(Kind::pow, fuzz_expr(rng, depth - 1), number(double(rng() % 3)));
    case 5: return call("sin", {fuzz_expr(rng, depth - 1)});
    default:
      return call("bump", {variable(Var::t), number(-4.0), number(3.0)});
  }
}

// 14. parser round-trip and byte-identical reports
CriterionResult c14() {
  CriterionResult r{14, "parser round-trip and deterministic reports", false, ""};
  std::mt19937_64 rng(31337);
  bool round = true;
  for (int k = 0; k < 20; ++k) {
    auto ast = fuzz_expr(rng, 4);
    auto back = expr::parse(expr::pretty_print(ast));
    round = round && expr::equal(ast, back);
  }
  Ctx c = default_ctx();
  VectorXd taus = default_tau_grid(*c.grid);
  auto rep1 = fredholm_verdict(laplacian_system(c, 1.0), 0.0, taus).to_json();
  auto rep2 = fredholm_verdict(laplacian_system(c, 1.0), 0.0, taus).to_json();
  bool identical = rep1 == rep2;
  r.pass = round && identical;
  r.detail = std::string("round-trip ") + (round ? "ok" : "FAIL") + ", reports " +
             (identical ? "byte-identical" : "DIFFER");
  return r;
}

}  // namespace

bool run_acceptance(std::ostream& os, std::vector<CriterionResult>* results) {
  Criterion all[] = {c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14};
  bool ok = true;
  int id = 0;
  for (Criterion fn : all) {
    ++id;
    CriterionResult res;
    try {
      res = fn();
    } catch (const std::exception& e) {
      res.id = id;
      res.name = "criterion " + std::to_string(id);
      res.pass = false;
      res.detail = std::string("exception: ") + e.what();
    }
    os << (res.pass ? "PASS" : "FAIL") << "  C" << (res.id < 10 ? "0" : "")
       << res.id << "  " << res.name << "  [" << res.detail << "]\n"
       << std::flush;
    ok = ok && res.pass;
    if (results) results->push_back(res);
  }
  return ok;
}

}  // namespace cylcalc
