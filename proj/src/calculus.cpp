#include "cylcalc/calculus.hpp"

#include <cmath>

#include "cylcalc/sobolev.hpp"

namespace cylcalc {

MatrixXcd LimitOperator::indicial(double tau) const {
  MatrixXcd M = MatrixXcd::Zero(dim_link(), dim_link());
  for (int k = 0; k < n_u; ++k) {
    if (C[k].size() == 0) continue;
    M += std::exp(Complex(0, -tau * u(k))) * C[k];
  }
  return M * (h_u * w_link);
}

MatrixXcd LimitOperator::window_matrix() const {
  int nx = dim_link();
  MatrixXcd M = MatrixXcd::Zero(nx * n_u, nx * n_u);
  for (int j = 0; j < n_u; ++j)
    for (int jp = 0; jp < n_u; ++jp) {
      int k = ((j - jp) % n_u + n_u) % n_u;
      if (C[k].size() == 0) continue;
      for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nx; ++b)
          M(a * n_u + j, b * n_u + jp) = C[k](a, b) * (h_u * w_link);
    }
  return M;
}

double LimitOperator::l2_norm() const {
  double mx = 0;
  for (int b = 0; b < n_u; ++b) {
    double tau = 2 * M_PI * (b <= n_u / 2 ? b : b - n_u) / (n_u * h_u);
    Eigen::JacobiSVD<MatrixXcd> svd(indicial(tau));
    mx = std::max(mx, svd.singularValues()(0));
  }
  return mx;
}

double LimitOperator::edge_decay() const {
  double mx = 0, edge = 0;
  for (int k = 0; k < n_u; ++k) {
    if (C[k].size() == 0) continue;
    double v = C[k].cwiseAbs().maxCoeff();
    mx = std::max(mx, v);
    if (std::abs(u(k)) >= 0.45 * n_u * h_u) edge = std::max(edge, v);
  }
  return mx > 0 ? edge / mx : 0.0;
}

LimitOperator limit_compose(const LimitOperator& A, const LimitOperator& B) {
  if (A.link.n_x != B.link.n_x || A.n_u != B.n_u || A.rank != B.rank)
    throw std::invalid_argument("limit_compose: window mismatch");
  LimitOperator R = A;
  R.order = A.order + B.order;
  R.eps = std::min(A.eps + B.eps, double(kUnbounded));
  R.tag = (A.tag == CalcTag::inv && B.tag == CalcTag::inv) ? CalcTag::inv : CalcTag::ess;
  int n = A.n_u, d = A.dim_link();
  // product of indicial matrices on the lattice, then back to kernel values
  std::vector<MatrixXcd> hat(n);
  for (int b = 0; b < n; ++b) {
    double tau = 2 * M_PI * b / (n * A.h_u);
    hat[b] = A.indicial(tau) * B.indicial(tau);
  }
  R.C.assign(n, MatrixXcd::Zero(d, d));
  for (int k = 0; k < n; ++k) {
    MatrixXcd M = MatrixXcd::Zero(d, d);
    for (int b = 0; b < n; ++b)
      M += std::exp(Complex(0, 2 * M_PI * double(b) * double(k) / n)) * hat[b];
    R.C[k] = M / (double(n) * A.h_u * A.w_link);
  }
  return R;
}

LimitOperator limit_adjoint(const LimitOperator& A) {
  LimitOperator R = A;
  for (int k = 0; k < A.n_u; ++k) {
    int mk = ((-k) % A.n_u + A.n_u) % A.n_u;
    R.C[k] = A.C[mk].size() ? MatrixXcd(A.C[mk].adjoint()) : A.C[mk];
  }
  return R;
}

LimitOperator limit_add(const LimitOperator& A, const LimitOperator& B, Complex alpha,
                        Complex beta) {
  LimitOperator R = A;
  R.order = std::max(A.order, B.order);
  R.eps = std::max(A.eps, B.eps);
  for (int k = 0; k < A.n_u; ++k) {
    MatrixXcd a = A.C[k].size() ? A.C[k] : MatrixXcd::Zero(A.dim_link(), A.dim_link());
    MatrixXcd b = B.C[k].size() ? B.C[k] : MatrixXcd::Zero(A.dim_link(), A.dim_link());
    R.C[k] = alpha * a + beta * b;
  }
  return R;
}

LimitOperator limit_commutator_with_t(const LimitOperator& A) {
  LimitOperator R = A;
  R.order = A.order - 1;
  for (int k = 0; k < A.n_u; ++k)
    if (A.C[k].size()) R.C[k] = A.u(k) * A.C[k];
  return R;
}

LimitOperator limit_from_multiplier(const LinkGrid& link, int n_u, double h_u,
                                    const MatrixXcd& mult, double order) {
  // mult is (n_u, n_x) in the dft2 layout: entry (b, m) = symbol(xi_m, tau_b)
  LimitOperator T;
  T.link = link;
  T.w_link = link.h();
  T.n_u = n_u;
  T.h_u = h_u;
  T.order = order;
  T.tag = CalcTag::inv;
  double LT = link.L_circ * (n_u * h_u);
  MatrixXcd gtab = dft2(mult) / LT;  // g(zx, zt), layout (zt, zx)
  T.C.assign(n_u, MatrixXcd());
  for (int k = 0; k < n_u; ++k) {
    MatrixXcd M(link.n_x, link.n_x);
    for (int a = 0; a < link.n_x; ++a)
      for (int b = 0; b < link.n_x; ++b) M(a, b) = gtab(k, ((a - b) % link.n_x + link.n_x) % link.n_x);
    T.C[k] = M;
  }
  return T;
}

namespace {

int row_of_t(const CylinderGrid& g, double t) {
  int j = int(std::lround((t - g.t_min) / g.h_t()));
  if (j < 0 || j >= g.n_t) throw std::runtime_error("probe row outside the grid");
  return j;
}

// kernel row -> C matrices over wrapped offsets; finite range when u_max given
std::vector<MatrixXcd> extract_row(const OperatorMatrix& P, int j_row, double u_max) {
  const auto& g = *P.grid;
  int nx = g.link.n_x, nt = g.n_t, nr = P.rank, npts = g.n_points();
  std::vector<MatrixXcd> C(nt);
  for (int k = 0; k < nt; ++k) {
    int w = ((k + nt / 2) % nt + nt) % nt - nt / 2;
    double u = w * g.h_t();
    if (std::abs(u) > u_max) continue;
    int j_col = j_row - w;
    bool wrapped = false;
    if (j_col < 0 || j_col >= nt) {
      j_col = ((j_col % nt) + nt) % nt;
      wrapped = true;
    }
    if (wrapped && !P.bicirculant && std::isfinite(P.eps)) continue;
    MatrixXcd M(nr * nx, nr * nx);
    for (int c = 0; c < nr; ++c)
      for (int cp = 0; cp < nr; ++cp)
        for (int a = 0; a < nx; ++a)
          for (int b = 0; b < nx; ++b)
            M(c * nx + a, cp * nx + b) =
                P.kernel(c * npts + g.index(a, j_row), cp * npts + g.index(b, j_col));
    C[k] = M;
  }
  return C;
}

double rows_gap(const std::vector<MatrixXcd>& A, const std::vector<MatrixXcd>& B) {
  double g = 0, scale = 0;
  for (size_t k = 0; k < A.size(); ++k) {
    if (A[k].size() && B[k].size())
      g = std::max(g, (A[k] - B[k]).cwiseAbs().maxCoeff());
    if (A[k].size()) scale = std::max(scale, A[k].cwiseAbs().maxCoeff());
  }
  return scale > 0 ? g / scale : 0.0;
}

}  // namespace

LimitOperator limit_operator(const OperatorMatrix& P, End end, double tol,
                             double* cauchy_gap) {
  const auto& g = *P.grid;
  if (P.tag == CalcTag::none)
    throw std::invalid_argument("limit_operator: operator carries no calculus tag");
  double h = g.h_t();
  double sgn = end == End::left ? -1.0 : 1.0;

  LimitOperator T;
  T.link = g.link;
  T.w_link = g.link.h();
  T.n_u = g.n_t;
  T.h_u = h;
  T.rank = P.rank;
  T.order = P.order;
  T.tag = P.tag == CalcTag::ess ? CalcTag::ess : CalcTag::inv;

  bool exact = P.tag == CalcTag::inv && std::isfinite(P.R);
  double gap = 0;
  if (exact) {
    double eps_eff = std::isfinite(P.eps) ? P.eps : 0.0;
    double s1 = P.R + eps_eff + 2 * h;
    double need = s1 + 4 * h + eps_eff;
    double avail = end == End::left ? -g.t_min : g.t_max - h;
    if (need > avail)
      throw std::runtime_error(
          "limit_operator: end region too short for the probe translations "
          "(needs " + std::to_string(need) + ", has " + std::to_string(avail) + ")");
    int j1 = row_of_t(g, sgn * s1);
    int j2 = row_of_t(g, sgn * (s1 + 4 * h));
    double u_max = std::isfinite(P.eps) ? P.eps + h : g.T();
    auto C1 = extract_row(P, j1, u_max);
    auto C2 = extract_row(P, j2, u_max);
    gap = rows_gap(C1, C2);
    if (gap > 1e-10)
      throw std::runtime_error(
          "limit_operator: probe rows disagree (operator not translation "
          "invariant at this end; gap " + std::to_string(gap) + ")");
    T.C = std::move(C2);
    T.eps = std::isfinite(P.eps) ? P.eps : kUnbounded;
  } else {
    // ess route: two depths with a Cauchy bound
    double R_eff = std::isfinite(P.R) ? P.R : g.R_inv;
    double t1 = sgn * (R_eff + (-g.t_min - R_eff) / 2.0);
    double u_max = P.bicirculant ? g.T() : ((-g.t_min - R_eff) / 2.0 - 4 * h);
    int j1 = row_of_t(g, t1);
    int j2 = row_of_t(g, t1 - sgn * 4 * h);
    auto C1 = extract_row(P, j1, u_max);
    auto C2 = extract_row(P, j2, u_max);
    gap = rows_gap(C1, C2);
    if (gap > tol)
      throw std::runtime_error(
          "limit_operator: Cauchy gap " + std::to_string(gap) +
          " above tolerance; operator is not in the calculus at grid scale");
    T.C.resize(g.n_t);
    for (int k = 0; k < g.n_t; ++k) {
      if (C1[k].size() && C2[k].size())
        T.C[k] = 0.5 * (C1[k] + C2[k]);
      else if (C1[k].size())
        T.C[k] = C1[k];
      else if (C2[k].size())
        T.C[k] = C2[k];
    }
    T.eps = P.bicirculant ? kUnbounded : u_max;
  }
  if (cauchy_gap) *cauchy_gap = gap;
  return T;
}

OperatorMatrix s0_extend(const LimitOperator& T, const GridPtr& grid, End end) {
  const auto& g = *grid;
  if (T.n_u != g.n_t || T.link.n_x != g.link.n_x)
    throw std::invalid_argument("s0_extend: window mismatch");
  if (std::isfinite(T.eps) && T.eps > -g.t_min - 2.0 - 2 * g.h_t())
    throw std::runtime_error("s0_extend: eps too large for the end region");
  CutoffProfile cut = default_cutoffs(grid);
  OperatorMatrix P;
  P.grid = grid;
  P.rank = T.rank;
  P.order = T.order;
  P.eps = T.eps;
  P.R = std::isfinite(T.eps) ? 2.0 + T.eps : 2.0;
  P.tag = T.tag;
  int npts = g.n_points(), nx = g.link.n_x;
  P.mat = MatrixXcd::Zero(T.rank * npts, T.rank * npts);
  double w = T.h_u * T.w_link;
  int nt = g.n_t;
  for (int j = 0; j < nt; ++j) {
    double ej = cut.eta(end, g.t(j));
    if (ej == 0) continue;
    for (int jp = 0; jp < nt; ++jp) {
      double ejp = cut.eta(end, g.t(jp));
      if (ejp == 0) continue;
      int k = ((j - jp) % nt + nt) % nt;
      if (T.C[k].size() == 0) continue;
      for (int c = 0; c < T.rank; ++c)
        for (int cp = 0; cp < T.rank; ++cp)
          for (int a = 0; a < nx; ++a)
            for (int b = 0; b < nx; ++b)
              P.mat(c * npts + g.index(a, j), cp * npts + g.index(b, jp)) =
                  ej * T.C[k](c * nx + a, cp * nx + b) * ejp * w;
    }
  }
  return P;
}

Decomposition decompose(const OperatorMatrix& P) {
  LimitOperator TL = limit_operator(P, End::left);
  LimitOperator TR = limit_operator(P, End::right);
  OperatorMatrix SL = s0_extend(TL, P.grid, End::left);
  OperatorMatrix SR = s0_extend(TR, P.grid, End::right);
  Decomposition D;
  D.invariant_part = SL;
  D.invariant_part.mat += SR.mat;
  D.invariant_part.R = std::max(SL.R, SR.R);
  D.invariant_part.eps = std::max(SL.eps, SR.eps);
  D.compact_part = P;
  D.compact_part.mat = P.mat - D.invariant_part.mat;
  D.compact_part.tag = CalcTag::comp;
  const auto& g = *P.grid;
  double scale = D.compact_part.mat.cwiseAbs().maxCoeff();
  double rad = 0;
  for (int p = 0; p < P.dim(); ++p)
    for (int q = 0; q < P.dim(); ++q)
      if (std::abs(D.compact_part.mat(p, q)) > 1e-12 * scale)
        rad = std::max(rad,
                       std::max(std::abs(g.t(g.j_of(p % g.n_points()))),
                                std::abs(g.t(g.j_of(q % g.n_points())))));
  D.compact_support_radius = rad;
  D.compact_part.eps = std::min(P.eps, SL.eps + SR.eps);
  D.compact_part.R = rad;
  return D;
}

OperatorMatrix compose(const OperatorMatrix& P, const OperatorMatrix& Q) {
  if (P.grid != Q.grid || P.rank != Q.rank)
    throw std::invalid_argument("compose: operand mismatch");
  if (std::isfinite(P.eps) && std::isfinite(Q.eps) &&
      P.eps + Q.eps > P.grid->margin + 1e-12)
    throw std::runtime_error("compose: margin violation (eps_P + eps_Q = " +
                             std::to_string(P.eps + Q.eps) + " > margin)");
  OperatorMatrix R;
  R.grid = P.grid;
  R.rank = P.rank;
  R.mat = P.mat * Q.mat;
  R.order = P.order + Q.order;
  R.eps = P.eps + Q.eps;
  R.bicirculant = P.bicirculant && Q.bicirculant;
  bool both_proper = std::isfinite(P.eps) && std::isfinite(Q.eps);
  if (R.bicirculant) {
    R.R = std::max(P.R, Q.R);
    R.tag = CalcTag::inv;
  } else if (both_proper) {
    R.R = std::max(P.R, Q.R) + R.eps;
    R.tag = (P.tag == CalcTag::inv && Q.tag == CalcTag::inv) ? CalcTag::inv
            : (P.tag == CalcTag::comp || Q.tag == CalcTag::comp) ? CalcTag::comp
                                                                 : CalcTag::ess;
  } else {
    R.R = kUnbounded;
    R.tag = CalcTag::ess;
  }
  return R;
}

OperatorMatrix operator_add(const OperatorMatrix& P, const OperatorMatrix& Q,
                            Complex alpha, Complex beta) {
  OperatorMatrix R = P;
  R.mat = alpha * P.mat + beta * Q.mat;
  R.order = std::max(P.order, Q.order);
  R.eps = std::max(P.eps, Q.eps);
  R.R = std::max(P.R, Q.R);
  R.bicirculant = P.bicirculant && Q.bicirculant;
  R.tag = (P.tag == CalcTag::inv && Q.tag == CalcTag::inv) ? CalcTag::inv : CalcTag::ess;
  return R;
}

OperatorMatrix adjoint(const OperatorMatrix& P) {
  OperatorMatrix R = P;
  R.mat = P.mat.adjoint();
  return R;
}

OperatorMatrix commutator_with_rho(const OperatorMatrix& P, const CutoffProfile& cut) {
  if (P.tag != CalcTag::inv && P.tag != CalcTag::ess)
    throw std::invalid_argument("commutator_with_rho: P must be tagged inv or ess");
  const auto& g = *P.grid;
  OperatorMatrix R = P;
  R.order = P.order - 1;
  R.bicirculant = false;
  double eps_fin = std::isfinite(P.eps) ? P.eps : 0.0;
  R.R = std::max(P.R, 1.0 + eps_fin);
  for (int p = 0; p < P.dim(); ++p) {
    double rp = cut.rho(g.t(g.j_of(p % g.n_points())));
    for (int q = 0; q < P.dim(); ++q) {
      double rq = cut.rho(g.t(g.j_of(q % g.n_points())));
      R.mat(p, q) = (rp - rq) * P.mat(p, q);
    }
  }
  return R;
}

IndicialFamily indicial_family(const LimitOperator& T, const VectorXd& taus,
                               double edge_tol) {
  IndicialFamily F;
  F.taus = taus;
  F.edge_decay = T.edge_decay();
  double lat = 2 * M_PI / (T.n_u * T.h_u);
  bool all_lattice = true;
  for (int i = 0; i < taus.size(); ++i) {
    double r = taus[i] / lat;
    if (std::abs(r - std::round(r)) > 1e-9) all_lattice = false;
  }
  if (!all_lattice && F.edge_decay > edge_tol)
    throw std::runtime_error(
        "indicial_family: insufficient kernel decay at the window edge (" +
        std::to_string(F.edge_decay) + ") for off-lattice quadrature");
  for (int i = 0; i < taus.size(); ++i) F.mats.push_back(T.indicial(taus[i]));
  return F;
}

ParametrixResult parametrix(const OperatorMatrix& P, const ClassicalSymbol& symb,
                            const CutoffProfile& chi, int N_order) {
  auto ell = is_elliptic(symb);
  if (!ell.elliptic) throw std::runtime_error("parametrix: symbol is not elliptic");
  double m = symb.order;
  auto comp0 = symb.components[0];
  FullSymbol binv = symbol_from_function(
      [comp0, m](double x, double t, double xi, double tau) -> Complex {
        double r = std::hypot(xi, tau);
        double cut = smooth_step((r - 0.7) / 0.6);
        if (cut == 0) return 0;
        Complex a = comp0(x, t, xi / r, tau / r) * std::pow(r, m);
        return cut / a;
      },
      -m, symb.R_a, true, symb.R_a > 0);
  OperatorMatrix Q = quantize(binv, P.grid, chi);
  int N = P.dim();
  MatrixXcd R1 = MatrixXcd::Identity(N, N) - Q.mat * P.mat;
  MatrixXcd S = MatrixXcd::Identity(N, N);
  MatrixXcd acc = MatrixXcd::Identity(N, N);
  for (int k = 1; k < N_order; ++k) {
    acc = R1 * acc;
    S += acc;
  }
  ParametrixResult out;
  out.Q = Q;
  out.Q.mat = S * Q.mat;
  out.Q.eps = std::isfinite(P.eps) ? N_order * (Q.eps + P.eps) : kUnbounded;
  out.Q.R = std::isfinite(P.eps) ? std::max(P.R, Q.R) + out.Q.eps : kUnbounded;
  out.Q.tag = std::isfinite(P.eps) ? CalcTag::inv : CalcTag::ess;
  const MatrixXcd& Qm = out.Q.mat;
  const MatrixXcd& Pm = P.mat;
  out.residual_left = opnorm_projected(
      [&](const VectorXcd& v) { return VectorXcd(v - Qm * (Pm * v)); },
      [&](const VectorXcd& v) { return VectorXcd(v - Pm.adjoint() * (Qm.adjoint() * v)); },
      *P.grid, P.rank);
  out.residual_right = opnorm_projected(
      [&](const VectorXcd& v) { return VectorXcd(v - Pm * (Qm * v)); },
      [&](const VectorXcd& v) { return VectorXcd(v - Qm.adjoint() * (Pm.adjoint() * v)); },
      *P.grid, P.rank);
  return out;
}

OrderReduction order_reduction(double s, double t0, const GridPtr& grid,
                               const CutoffProfile& chi) {
  OrderReduction out;
  out.t0 = t0;
  OperatorMatrix Lp = quantize(order_reduction_symbol(s, t0), grid, chi);
  OperatorMatrix Lm = quantize(order_reduction_symbol(-s, t0), grid, chi);
  const MatrixXcd& A = Lp.mat;
  const MatrixXcd& B = Lm.mat;
  out.residual_right = opnorm_projected(
      [&](const VectorXcd& v) { return VectorXcd(A * (B * v) - v); },
      [&](const VectorXcd& v) { return VectorXcd(B.adjoint() * (A.adjoint() * v) - v); },
      *grid, 1);
  out.residual_left = opnorm_weighted(
      [&](const VectorXcd& v) { return VectorXcd(B * (A * v) - v); },
      [&](const VectorXcd& v) { return VectorXcd(A.adjoint() * (B.adjoint() * v) - v); },
      *grid, 1, s, s);
  out.certified = out.residual_right < 1.0 && out.residual_left < 1.0;
  out.op = std::move(Lp);
  return out;
}

OrderReduction order_reduction_auto(double s, const GridPtr& grid,
                                    const CutoffProfile& chi, double target) {
  double lo = 0, hi = 1.0;
  OrderReduction best;
  for (int k = 0; k < 12; ++k) {
    best = order_reduction(s, hi, grid, chi);
    if (std::max(best.residual_left, best.residual_right) <= target) break;
    lo = hi;
    hi *= 2;
  }
  if (std::max(best.residual_left, best.residual_right) > target)
    throw std::runtime_error("order_reduction_auto: no admissible t0 found");
  for (int k = 0; k < 6 && hi - lo > 0.05 * hi; ++k) {
    double mid = 0.5 * (lo + hi);
    OrderReduction trial = order_reduction(s, mid, grid, chi);
    if (std::max(trial.residual_left, trial.residual_right) <= target) {
      hi = mid;
      best = trial;
    } else {
      lo = mid;
    }
  }
  return best;
}

ADNSystem adn_compose(const ADNSystem& Q, const ADNSystem& P) {
  if (Q.spec.k != P.spec.k) throw std::invalid_argument("adn_compose: size mismatch");
  for (int i = 0; i < Q.spec.k; ++i)
    if (std::abs(Q.spec.t[i] - P.spec.s[i]) > 1e-12)
      throw std::invalid_argument("adn_compose: order mismatch (Q.t != P.s)");
  ADNSystem R;
  R.spec.k = Q.spec.k;
  R.spec.s = Q.spec.s;
  R.spec.t = P.spec.t;
  R.grid = P.grid;
  int k = R.spec.k;
  R.blocks.assign(k, std::vector<std::optional<OperatorMatrix>>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      std::optional<OperatorMatrix> acc;
      for (int l = 0; l < k; ++l) {
        if (!Q.blocks[i][l] || !P.blocks[l][j]) continue;
        OperatorMatrix term = compose(*Q.blocks[i][l], *P.blocks[l][j]);
        if (!acc)
          acc = term;
        else
          acc = operator_add(*acc, term, 1.0, 1.0);
      }
      if (acc) acc->order = R.spec.block_order(i, j);
      R.blocks[i][j] = acc;
    }
  // principal symbol product
  R.symb.spec = R.spec;
  R.symb.blocks.assign(k, std::vector<std::optional<ClassicalSymbol>>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      std::vector<std::pair<std::function<Complex(double, double, double, double)>,
                            std::function<Complex(double, double, double, double)>>>
          terms;
      for (int l = 0; l < k; ++l)
        if (Q.symb.blocks[i][l] && P.symb.blocks[l][j])
          terms.push_back({Q.symb.blocks[i][l]->components[0],
                           P.symb.blocks[l][j]->components[0]});
      if (terms.empty()) continue;
      ClassicalSymbol c;
      c.order = R.spec.block_order(i, j);
      c.N_terms = 1;
      c.components.push_back(
          [terms](double x, double t, double wx, double wt) -> Complex {
            Complex s = 0;
            for (const auto& [a, b] : terms) s += a(x, t, wx, wt) * b(x, t, wx, wt);
            return s;
          });
      R.symb.blocks[i][j] = c;
    }
  return R;
}

ADNSystem adn_adjoint(const ADNSystem& P) {
  ADNSystem R;
  R.spec.k = P.spec.k;
  R.spec.s = P.spec.t;
  R.spec.t = P.spec.s;
  R.grid = P.grid;
  int k = R.spec.k;
  R.blocks.assign(k, std::vector<std::optional<OperatorMatrix>>(k));
  R.symb.spec = R.spec;
  R.symb.blocks.assign(k, std::vector<std::optional<ClassicalSymbol>>(k));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (P.blocks[j][i]) R.blocks[i][j] = adjoint(*P.blocks[j][i]);
      if (P.symb.blocks[j][i]) {
        ClassicalSymbol c = *P.symb.blocks[j][i];
        auto f = c.components[0];
        c.components[0] = [f](double x, double t, double wx, double wt) {
          return std::conj(f(x, t, wx, wt));
        };
        R.symb.blocks[i][j] = c;
      }
    }
  return R;
}

MatrixXcd adn_stacked(const ADNSystem& S) {
  int N = S.grid->n_points();
  int k = S.spec.k;
  MatrixXcd M = MatrixXcd::Zero(k * N, k * N);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (S.blocks[i][j]) M.block(i * N, j * N, N, N) = S.blocks[i][j]->mat;
  return M;
}

}  // namespace cylcalc
