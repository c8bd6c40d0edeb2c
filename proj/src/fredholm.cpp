#include "cylcalc/fredholm.hpp"

#include <Eigen/LU>

namespace cylcalc {

std::string FredholmReport::to_json() const {
  JsonWriter w;
  w.put("verdict", verdict);
  w.put("adn_elliptic", adn_elliptic);
  w.put("adn_min_det", adn_min_det);
  w.put("tol_sv", tol_sv);
  std::vector<std::string> ends;
  for (const auto& e : per_end) {
    JsonWriter we;
    we.put("end", e.end);
    we.put("indicial_ok", e.indicial_ok);
    we.put("min_sv", e.min_sv);
    we.put("argmin_tau", e.argmin_tau);
    we.put("large_tau_certificate", e.large_tau_certificate);
    we.put("handoff_radius", e.handoff_radius);
    we.put("noninvertible_taus", e.noninvertible_taus);
    if (!e.failure.empty()) we.put("failure", e.failure);
    ends.push_back(we.str());
  }
  w.put_raw("per_end", json_array(ends));
  return w.str();
}

VectorXd default_tau_grid(const CylinderGrid& g, double tau_max, int points) {
  if (tau_max <= 0) {
    double max_link = M_PI * g.link.n_x / g.link.L_circ;  // largest |xi|
    // the scan cannot leave the axial frequency window of the grid
    tau_max = std::min(4.0 * max_link, 0.95 * M_PI / g.h_t());
  }
  VectorXd taus(points);
  for (int i = 0; i < points; ++i)
    taus[i] = -tau_max + 2.0 * tau_max * i / (points - 1);
  return taus;
}

namespace {

// weighted indicial matrix in the link Fourier basis
MatrixXcd weighted_indicial(const ADNSystem& sys,
                            const std::vector<std::vector<std::optional<LimitOperator>>>& lims,
                            double m, double tau, const MatrixXcd& F,
                            const MatrixXcd& Finv) {
  int k = sys.spec.k, nx = sys.grid->link.n_x;
  MatrixXcd B = MatrixXcd::Zero(k * nx, k * nx);
  VectorXd wgt(nx);
  for (int a = 0; a < nx; ++a) {
    double xi = sys.grid->link.xi(a);
    wgt[a] = 1.0 + xi * xi + tau * tau;
  }
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      if (!lims[i][j]) continue;
      MatrixXcd hat = F * lims[i][j]->indicial(tau) * Finv;
      for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nx; ++b)
          hat(a, b) *= std::pow(wgt[a], (m - sys.spec.s[i]) / 2.0) *
                       std::pow(wgt[b], -(m + sys.spec.t[j]) / 2.0);
      B.block(i * nx, j * nx, nx, nx) = hat;
    }
  return B;
}

double min_sv(const MatrixXcd& M) {
  Eigen::JacobiSVD<MatrixXcd> svd(M);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double max_sv(const MatrixXcd& M) {
  Eigen::JacobiSVD<MatrixXcd> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

FredholmReport fredholm_verdict(const ADNSystem& sys, double m,
                                const VectorXd& tau_grid, double tol_ell,
                                double tol_sv) {
  FredholmReport rep;
  auto ell = is_adn_elliptic(sys.symb, tol_ell);
  rep.adn_elliptic = ell.elliptic;
  rep.adn_min_det = ell.min_det;

  const auto& g = *sys.grid;
  int nx = g.link.n_x, k = sys.spec.k;
  MatrixXcd F(nx, nx), Finv(nx, nx);
  for (int a = 0; a < nx; ++a)
    for (int b = 0; b < nx; ++b) {
      F(a, b) = std::exp(Complex(0, -2 * M_PI * double(a) * double(b) / nx)) /
                std::sqrt(double(nx));
      Finv(a, b) = std::exp(Complex(0, 2 * M_PI * double(a) * double(b) / nx)) /
                   std::sqrt(double(nx));
    }

  // large-|tau| certificate: the weighted family approaches the normalized
  // symbol matrix at the axial directions (0, +-1)
  double cert = std::numeric_limits<double>::infinity();
  for (double sgn : {1.0, -1.0})
    for (double xs : {0.0, 1.1, 2.9}) {
      MatrixXcd S = sys.symb.principal_at(xs, 0.0, 0.0, sgn);
      cert = std::min(cert, min_sv(S));
    }

  for (End end : {End::left, End::right}) {
    EndReport er;
    er.end = end == End::left ? "left" : "right";
    er.large_tau_certificate = cert;
    std::vector<std::vector<std::optional<LimitOperator>>> lims(
        k, std::vector<std::optional<LimitOperator>>(k));
    try {
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j)
          if (sys.blocks[i][j]) lims[i][j] = limit_operator(*sys.blocks[i][j], end);
    } catch (const std::exception& e) {
      er.failure = e.what();
      er.indicial_ok = false;
      rep.per_end.push_back(er);
      continue;
    }
    auto sv_at = [&](double tau) {
      return min_sv(weighted_indicial(sys, lims, m, tau, F, Finv));
    };
    int n = int(tau_grid.size());
    VectorXd vals(n);
    double mx = 0;
    for (int i = 0; i < n; ++i) {
      vals[i] = sv_at(tau_grid[i]);
      mx = std::max(mx, vals[i]);
      // track the scan max singular value for the relative tolerance
      mx = std::max(mx, 1e-300);
    }
    double tol = tol_sv > 0 ? tol_sv : 1e-6 * std::max(mx, cert);
    rep.tol_sv = tol;

    // local minima, refined by golden-section search
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double global_min = std::numeric_limits<double>::infinity(), global_arg = 0;
    for (int i = 0; i < n; ++i) {
      bool is_min = (i == 0 || vals[i] <= vals[i - 1]) &&
                    (i == n - 1 || vals[i] <= vals[i + 1]);
      if (!is_min) continue;
      double a = tau_grid[std::max(0, i - 1)], b = tau_grid[std::min(n - 1, i + 1)];
      double c = b - gr * (b - a), d = a + gr * (b - a);
      double fc = sv_at(c), fd = sv_at(d);
      for (int it = 0; it < 48 && (b - a) > 1e-12 * (1 + std::abs(a)); ++it) {
        if (fc < fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - gr * (b - a);
          fc = sv_at(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + gr * (b - a);
          fd = sv_at(d);
        }
      }
      double arg = 0.5 * (a + b), val = sv_at(arg);
      if (val < global_min) {
        global_min = val;
        global_arg = arg;
      }
      if (val < tol) er.noninvertible_taus.push_back(arg);
    }
    er.min_sv = global_min;
    er.argmin_tau = global_arg;
    er.indicial_ok = global_min >= tol;
    // hand-off: outermost scan point where the value is within 2x of the certificate
    er.handoff_radius = std::abs(tau_grid[n - 1]);
    for (int i = n - 1; i >= n / 2; --i) {
      if (vals[i] <= 2.0 * cert) {
        er.handoff_radius = std::abs(tau_grid[i]);
        break;
      }
    }
    rep.per_end.push_back(er);
  }

  rep.verdict = rep.adn_elliptic;
  for (const auto& e : rep.per_end) rep.verdict = rep.verdict && e.indicial_ok;
  return rep;
}

FredholmReport fredholm_verdict_multiplier(const FullSymbol& a,
                                           const ClassicalSymbol& symb,
                                           const GridPtr& grid, double m,
                                           const VectorXd& tau_grid, double tol_ell,
                                           double tol_sv) {
  FredholmReport rep;
  SymbolMatrix S;
  S.spec = ADNOrderSpec{1, {0.0}, {a.order}};
  S.blocks.assign(1, {symb});
  auto ell = is_adn_elliptic(S, tol_ell);
  rep.adn_elliptic = ell.elliptic;
  rep.adn_min_det = ell.min_det;

  const auto& g = *grid;
  int nx = g.link.n_x, nt = g.n_t;
  // per-frequency convolution kernels g_m(u) = idft_tau a(xi_m, .)
  MatrixXcd G(nt, nx);
  for (int mm = 0; mm < nx; ++mm) {
    VectorXcd col(nt);
    for (int b = 0; b < nt; ++b) col[b] = a.eval(0, 0, g.link.xi(mm), g.tau(b));
    G.col(mm) = idft(col);
  }
  VectorXd us(nt);
  for (int k = 0; k < nt; ++k)
    us[k] = (((k + nt / 2) % nt + nt) % nt - nt / 2) * g.h_t();

  auto sv_at = [&](double tau) {
    double mn = std::numeric_limits<double>::infinity();
    VectorXcd ph(nt);
    for (int k = 0; k < nt; ++k) ph[k] = std::exp(Complex(0, -tau * us[k]));
    for (int mm = 0; mm < nx; ++mm) {
      Complex hat = (G.col(mm).array() * ph.array()).sum() * g.h_t();
      double xi = g.link.xi(mm);
      double w = 1.0 + xi * xi + tau * tau;
      mn = std::min(mn, std::abs(hat) * std::pow(w, -a.order / 2.0));
    }
    return mn;
  };

  double cert = std::numeric_limits<double>::infinity();
  for (double sgn : {1.0, -1.0})
    cert = std::min(cert, std::abs(symb.components[0](0, 0, 0.0, sgn)));

  EndReport er;
  er.large_tau_certificate = cert;
  int n = int(tau_grid.size());
  VectorXd vals(n);
  double mx = 0;
  for (int i = 0; i < n; ++i) {
    vals[i] = sv_at(tau_grid[i]);
    mx = std::max(mx, vals[i]);
  }
  double tol = tol_sv > 0 ? tol_sv : 1e-6 * std::max(mx, cert);
  rep.tol_sv = tol;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double global_min = std::numeric_limits<double>::infinity(), global_arg = 0;
  for (int i = 0; i < n; ++i) {
    bool is_min =
        (i == 0 || vals[i] <= vals[i - 1]) && (i == n - 1 || vals[i] <= vals[i + 1]);
    if (!is_min) continue;
    double lo = tau_grid[std::max(0, i - 1)], hi = tau_grid[std::min(n - 1, i + 1)];
    double c = hi - gr * (hi - lo), d = lo + gr * (hi - lo);
    double fc = sv_at(c), fd = sv_at(d);
    for (int it = 0; it < 48 && (hi - lo) > 1e-12 * (1 + std::abs(lo)); ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - gr * (hi - lo);
        fc = sv_at(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + gr * (hi - lo);
        fd = sv_at(d);
      }
    }
    double arg = 0.5 * (lo + hi), val = sv_at(arg);
    if (val < global_min) {
      global_min = val;
      global_arg = arg;
    }
    if (val < tol) er.noninvertible_taus.push_back(arg);
  }
  er.min_sv = global_min;
  er.argmin_tau = global_arg;
  er.indicial_ok = global_min >= tol;
  er.handoff_radius = std::abs(tau_grid[n - 1]);
  for (int i = n - 1; i >= n / 2; --i)
    if (vals[i] <= 2.0 * cert) {
      er.handoff_radius = std::abs(tau_grid[i]);
      break;
    }
  er.end = "left";
  rep.per_end.push_back(er);
  er.end = "right";
  rep.per_end.push_back(er);
  rep.verdict = rep.adn_elliptic;
  for (const auto& e : rep.per_end) rep.verdict = rep.verdict && e.indicial_ok;
  return rep;
}

// ---------------------------------------------------------------- compactness

std::string CompactnessReport::to_json() const {
  JsonWriter w;
  w.put("verdict", verdict);
  w.put("sigma0_rel", sigma0_rel);
  w.put("sigma0_threshold", sigma0_threshold);
  w.put("in_norm_rel", in_norm_rel);
  w.put("op_norm", op_norm);
  w.put("singular_tail", singular_tail);
  if (!failure.empty()) w.put("failure", failure);
  return w.str();
}

CompactnessReport compactness_check(const OperatorMatrix& P) {
  CompactnessReport rep;
  const auto& g = *P.grid;
  rep.op_norm = opnorm_projected(P.mat, g, P.rank);
  double scale = std::max(rep.op_norm, 1e-300);

  // (a) principal symbol magnitude at the top alias-free scale
  double s0 = 0, top = 0;
  for (auto [ra, rb] : std::vector<std::pair<int, int>>{{1, 0}, {0, 1}, {1, 8}, {-1, 8}}) {
    try {
      auto ex = oscillatory_symbol_extract_apply(
          [&](const VectorXcd& v) { return VectorXcd(P.mat * v); }, g, 0.0, 1,
          g.n_t / 2 + 3, ra, rb);
      s0 = std::max(s0, std::abs(ex.values[ex.values.size() - 1]));
      top = std::max(top, ex.top_scale);
    } catch (const std::exception&) {
    }
  }
  rep.sigma0_rel = s0 / scale;
  rep.sigma0_threshold = 2.0 / std::max(top, 1.0);

  // (b) limit operators
  try {
    double nl = limit_operator(P, End::left).l2_norm();
    double nr = limit_operator(P, End::right).l2_norm();
    rep.in_norm_rel = std::max(nl, nr) / scale;
  } catch (const std::exception& e) {
    rep.failure = e.what();
    rep.in_norm_rel = std::numeric_limits<double>::infinity();
  }

  // (c) singular values of the effective support block
  double entry_scale = P.mat.cwiseAbs().maxCoeff();
  std::vector<int> live;
  for (int p = 0; p < P.dim(); ++p) {
    double mr = P.mat.row(p).cwiseAbs().maxCoeff();
    double mc = P.mat.col(p).cwiseAbs().maxCoeff();
    if (std::max(mr, mc) > 1e-14 * entry_scale) live.push_back(p);
  }
  if (!live.empty()) {
    MatrixXcd B(live.size(), live.size());
    for (size_t r = 0; r < live.size(); ++r)
      for (size_t c = 0; c < live.size(); ++c) B(r, c) = P.mat(live[r], live[c]);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(B.adjoint() * B,
                                                Eigen::EigenvaluesOnly);
    VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();  // ascending
    int nb = int(sv.size());
    for (double q : {0.25, 0.5, 0.75})
      rep.singular_tail.push_back(sv[int((1.0 - q) * (nb - 1))]);  // sigma at quantile q
  }
  rep.verdict = rep.sigma0_rel <= rep.sigma0_threshold && rep.in_norm_rel <= 1e-8;
  return rep;
}

// ---------------------------------------------------------------- inversion

std::string MembershipReport::to_json() const {
  JsonWriter w;
  w.put("verdict", verdict);
  w.put("inv_part_residual", inv_part_residual);
  w.put("cauchy_gap", cauchy_gap);
  w.put("decay_exponents", decay_exponents);
  w.put("weighted_sup", weighted_sup);
  w.put("schwartz_remainder_decay", schwartz_remainder_decay);
  return w.str();
}

OperatorMatrix adn_as_operator(const ADNSystem& sys) {
  OperatorMatrix P;
  P.grid = sys.grid;
  P.rank = sys.spec.k;
  P.mat = adn_stacked(sys);
  P.order = 0;
  P.eps = 0;
  P.R = 0;
  P.bicirculant = true;
  P.tag = CalcTag::inv;
  for (int i = 0; i < sys.spec.k; ++i)
    for (int j = 0; j < sys.spec.k; ++j)
      if (sys.blocks[i][j]) {
        const auto& B = *sys.blocks[i][j];
        P.order = std::max(P.order, B.order);
        P.eps = std::max(P.eps, B.eps);
        P.R = std::max(P.R, B.R);
        P.bicirculant = P.bicirculant && B.bicirculant;
        if (B.tag == CalcTag::ess) P.tag = CalcTag::ess;
      }
  return P;
}

namespace {

// weights (1 + |zeta|^2)^{e_c / 2} applied per component
VectorXcd apply_block_weight(const CylinderGrid& g, const VectorXcd& v,
                             const std::vector<double>& exps) {
  int npts = g.n_points();
  VectorXcd out(v.size());
  for (size_t c = 0; c < exps.size(); ++c)
    out.segment(c * npts, npts) =
        apply_weight(g, VectorXcd(v.segment(c * npts, npts)), exps[c]);
  return out;
}

MembershipReport membership_report(const OperatorMatrix& Tinv,
                                   const CutoffProfile& cut) {
  MembershipReport rep;
  const auto& g = *Tinv.grid;
  int npts = g.n_points(), nx = g.link.n_x, nt = g.n_t, nr = Tinv.rank;

  double gapL = 0, gapR = 0;
  LimitOperator CL = limit_operator(Tinv, End::left, 1e-2, &gapL);
  LimitOperator CR = limit_operator(Tinv, End::right, 1e-2, &gapR);
  rep.cauchy_gap = std::max(gapL, gapR);

  // near-diagonal invariance defect: Cauchy gap restricted to |u| <= 2
  {
    double nd = 0, scale = 0;
    for (int k = 0; k < CL.n_u; ++k) {
      if (!CL.C[k].size()) continue;
      scale = std::max(scale, CL.C[k].cwiseAbs().maxCoeff());
    }
    rep.inv_part_residual = rep.cauchy_gap;  // gap already relative
    (void)nd;
    (void)scale;
  }

  // far-field decay exponents of the convolution kernel over probe windows
  auto cprofile = [&](const LimitOperator& C) {
    std::vector<std::pair<double, double>> prof;  // (|u|, max |C|)
    for (int k = 0; k < C.n_u; ++k) {
      if (!C.C[k].size()) continue;
      double u = std::abs(C.u(k));
      if (u < 1e-12) continue;
      prof.push_back({u, C.C[k].cwiseAbs().maxCoeff()});
    }
    return prof;
  };
  auto profL = cprofile(CL);
  double u_max = 0;
  for (auto& [u, v] : profL) u_max = std::max(u_max, u);
  double u0 = 2.0;
  double ratio = std::pow(std::max(u_max, 2.5 * u0) / u0, 1.0 / 6.0);
  for (int p = 1; p <= 6; ++p) {
    double lo = u0 * std::pow(ratio, p - 1), hi = u0 * std::pow(ratio, p);
    double clo = 0, chi_ = 0;
    for (auto& [u, v] : profL) {
      if (std::abs(u - lo) < 0.51 * g.h_t()) clo = std::max(clo, v);
      if (std::abs(u - hi) < 0.51 * g.h_t()) chi_ = std::max(chi_, v);
    }
    if (clo > 0 && chi_ > 0)
      rep.decay_exponents.push_back(-std::log(chi_ / clo) / std::log(hi / lo));
    else
      rep.decay_exponents.push_back(std::numeric_limits<double>::infinity());
  }

  // remainder = kernel - eta-extended invariant parts; weighted sups
  MatrixXcd rem = Tinv.mat / g.quad_weight();
  for (int c = 0; c < nr; ++c)
    for (int cp = 0; cp < nr; ++cp)
      for (int a = 0; a < nx; ++a)
        for (int b = 0; b < nx; ++b)
          for (int j = 0; j < nt; ++j)
            for (int jp = 0; jp < nt; ++jp) {
              int k = ((j - jp) % nt + nt) % nt;
              Complex v = 0;
              double el = cut.eta(End::left, g.t(j)) * cut.eta(End::left, g.t(jp));
              double er = cut.eta(End::right, g.t(j)) * cut.eta(End::right, g.t(jp));
              if (el > 0 && CL.C[k].size()) v += el * CL.C[k](c * nx + a, cp * nx + b);
              if (er > 0 && CR.C[k].size()) v += er * CR.C[k](c * nx + a, cp * nx + b);
              if (v != 0.0)
                rem(c * npts + g.index(a, j), cp * npts + g.index(b, jp)) -= v;
            }
  double kscale = (Tinv.mat / g.quad_weight()).cwiseAbs().maxCoeff();
  // sampled weighted sup-norms |rho(t)^i rho(s)^j rem|, i, j <= 4
  for (int iw = 0; iw <= 4; ++iw)
    for (int jw = 0; jw <= 4; ++jw) {
      if (iw + jw >= 7) continue;
      double sup = 0;
      for (int p = 0; p < Tinv.dim(); p += 3)
        for (int q = 0; q < Tinv.dim(); q += 3) {
          double rp = cut.rho(g.t(g.j_of(p % npts))), rq = cut.rho(g.t(g.j_of(q % npts)));
          sup = std::max(sup, std::abs(rem(p, q)) * std::pow(-rp, iw) * std::pow(-rq, jw));
        }
      rep.weighted_sup.push_back(sup / std::max(kscale, 1e-300));
    }

  // remainder far-field decay: log-log slope of max|rem| against |t-s|
  {
    std::vector<double> prof(nt, 0.0);
    for (int p = 0; p < Tinv.dim(); ++p)
      for (int q = 0; q < Tinv.dim(); ++q) {
        int dj = std::abs(g.j_of(p % npts) - g.j_of(q % npts));
        prof[dj] = std::max(prof[dj], std::abs(rem(p, q)));
      }
    double lo_u = 4.0, hi_u = std::min(0.45 * g.T(), 4.0 * 4.0);
    int jlo = int(lo_u / g.h_t()), jhi = int(hi_u / g.h_t());
    if (prof[jlo] > 0 && prof[jhi] > 0 && jhi > jlo)
      rep.schwartz_remainder_decay =
          -std::log(prof[jhi] / prof[jlo]) / std::log(double(jhi) / jlo);
    else
      rep.schwartz_remainder_decay = std::numeric_limits<double>::infinity();
  }

  rep.verdict = rep.cauchy_gap <= 1e-2;
  for (int p = 1; p <= 6; ++p) {
    double e = rep.decay_exponents[p - 1];
    rep.verdict = rep.verdict && (e >= double(p));
    if (p > 1 && std::isfinite(e) && std::isfinite(rep.decay_exponents[p - 2]))
      rep.verdict = rep.verdict && (e >= rep.decay_exponents[p - 2] - 0.5);
  }
  return rep;
}

}  // namespace

InversionResult invert_and_verify(const ADNSystem& sys, double m, double tol_inv) {
  const auto& g = *sys.grid;
  for (double v : sys.spec.s)
    if (v < 0) throw std::invalid_argument("invert_and_verify: s_i must be >= 0");
  for (double v : sys.spec.t)
    if (v < 0) throw std::invalid_argument("invert_and_verify: t_j must be >= 0");

  OperatorMatrix T = adn_as_operator(sys);
  int n = T.dim();
  std::vector<double> w_out(sys.spec.k), w_in(sys.spec.k);
  for (int i = 0; i < sys.spec.k; ++i) {
    w_out[i] = m - sys.spec.s[i];
    w_in[i] = m + sys.spec.t[i];
  }
  Eigen::PartialPivLU<MatrixXcd> lu(T.mat);

  // weighted extreme singular values via power iterations
  auto fwd = [&](const VectorXcd& v) {
    return apply_block_weight(g, T.mat * apply_block_weight(g, v, std::vector<double>{}),
                              std::vector<double>{});
  };
  (void)fwd;
  std::vector<double> w_in_neg(w_in), w_out_pos(w_out), w_in_pos(w_in), w_out_neg(w_out);
  for (auto& v : w_in_neg) v = -v;
  for (auto& v : w_out_neg) v = -v;
  auto Aw = [&](const VectorXcd& v) {
    return apply_block_weight(g, VectorXcd(T.mat * apply_block_weight(g, v, w_in_neg)),
                              w_out_pos);
  };
  auto AwH = [&](const VectorXcd& v) {
    return apply_block_weight(
        g, VectorXcd(T.mat.adjoint() * apply_block_weight(g, v, w_out_pos)), w_in_neg);
  };
  auto AwInv = [&](const VectorXcd& v) {
    return apply_block_weight(g, VectorXcd(lu.solve(apply_block_weight(g, v, w_out_neg))),
                              w_in_pos);
  };
  auto AwInvH = [&](const VectorXcd& v) {
    return apply_block_weight(
        g, VectorXcd(lu.adjoint().solve(apply_block_weight(g, v, w_in_pos))), w_out_neg);
  };
  // note: these are global (unprojected) estimates
  auto gram_max = [&](const std::function<VectorXcd(const VectorXcd&)>& A,
                      const std::function<VectorXcd(const VectorXcd&)>& AH) {
    VectorXcd v = VectorXcd::Ones(n);
    for (int i = 0; i < n; ++i) v[i] = Complex(std::cos(0.7 * i + 0.3), std::sin(1.1 * i));
    v.normalize();
    double lam = 0;
    for (int it = 0; it < 50; ++it) {
      VectorXcd w = AH(A(v));
      double nl = w.norm();
      if (nl == 0) return 0.0;
      if (std::abs(nl - lam) < 1e-8 * nl && it > 4) {
        lam = nl;
        break;
      }
      lam = nl;
      v = w / nl;
    }
    return std::sqrt(lam);
  };
  InversionResult out;
  out.max_singular = gram_max(Aw, AwH);
  double inv_norm = gram_max(AwInv, AwInvH);
  out.min_singular = inv_norm > 0 ? 1.0 / inv_norm : 0.0;
  if (tol_inv <= 0) tol_inv = 1e-8 * out.max_singular;
  if (out.min_singular < tol_inv)
    throw std::runtime_error("invert_and_verify: weighted matrix numerically singular "
                             "(smallest singular value " +
                             std::to_string(out.min_singular) + ")");

  out.inverse.grid = sys.grid;
  out.inverse.rank = sys.spec.k;
  out.inverse.mat = lu.inverse();
  out.inverse.order = -T.order;
  out.inverse.eps = kUnbounded;
  out.inverse.R = kUnbounded;
  out.inverse.tag = CalcTag::ess;
  out.inverse.bicirculant = T.bicirculant;

  CutoffProfile cut = default_cutoffs(sys.grid);
  out.membership = membership_report(out.inverse, cut);

  // Atkinson cross-check with a symbol-side parametrix (matrix-free signals)
  try {
    FullSymbol binv = symbol_from_function(
        [&](double x, double t, double xi, double tau) -> Complex {
          double r = std::hypot(xi, tau);
          double cute = smooth_step((r - 0.7) / 0.6);
          if (cute == 0 || sys.spec.k != 1) return 0;
          Complex a = sys.symb.blocks[0][0]->components[0](x, t, xi / r, tau / r) *
                      std::pow(r, sys.symb.blocks[0][0]->order);
          return cute / a;
        },
        -T.order, 0.0, true, true);
    if (sys.spec.k == 1) {
      OperatorMatrix Q = quantize(binv, sys.grid, cut);
      auto resid_apply = [&](const VectorXcd& v) {
        return VectorXcd(v - Q.mat * (T.mat * v));
      };
      auto ex = oscillatory_symbol_extract_apply(resid_apply, g, 0.0, 1, g.n_t / 2 + 3,
                                                 0, 1);
      out.atkinson_sigma0 = std::abs(ex.values[ex.values.size() - 1]);
      LimitOperator QT = limit_compose(limit_operator(Q, End::left),
                                       limit_operator(T, End::left));
      LimitOperator one = QT;
      for (int k2 = 0; k2 < one.n_u; ++k2)
        if (one.C[k2].size())
          one.C[k2] = (k2 == 0 ? 1.0 : 0.0) / (one.h_u * one.w_link) *
                      MatrixXcd::Identity(one.dim_link(), one.dim_link());
      out.atkinson_in_norm = limit_add(one, QT, 1.0, -1.0).l2_norm();
    }
  } catch (const std::exception&) {
    out.atkinson_sigma0 = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

InversionResult invert_and_verify(const OperatorMatrix& T, const ClassicalSymbol& symb,
                                  double m, double tol_inv) {
  ADNSystem sys;
  sys.spec.k = 1;
  sys.spec.s = {0.0};
  sys.spec.t = {T.order};
  sys.grid = T.grid;
  sys.blocks.assign(1, {T});
  sys.symb.spec = sys.spec;
  sys.symb.blocks.assign(1, {symb});
  return invert_and_verify(sys, m, tol_inv);
}

// ---------------------------------------------------------------- joint map

std::string JointRecord::to_json() const {
  JsonWriter w;
  w.put("in_norm_left", in_norm_left);
  w.put("in_norm_right", in_norm_right);
  w.put("sigma_top", sigma_top);
  w.put("compat_defect", compat_defect);
  w.put("both_vanish", both_vanish);
  return w.str();
}

JointRecord in_sigma_joint(const OperatorMatrix& T) {
  JointRecord rec;
  const auto& g = *T.grid;
  LimitOperator TL = limit_operator(T, End::left, 1e-2);
  LimitOperator TR = limit_operator(T, End::right, 1e-2);
  rec.in_norm_left = TL.l2_norm();
  rec.in_norm_right = TR.l2_norm();

  // symbol of T at a base point deep in the left end vs the same extraction
  // applied to s0(In_L T)
  int j_deep = int(std::lround((-(std::isfinite(T.R) ? std::min(T.R, g.R_inv) : g.R_inv) -
                                2.0 - g.t_min) /
                               g.h_t()));
  j_deep = std::max(j_deep, 2);
  auto exT = oscillatory_symbol_extract(T, 0, j_deep, 0, 1);
  OperatorMatrix S = s0_extend(TL, T.grid, End::left);
  S.order = T.order;
  auto exS = oscillatory_symbol_extract(S, 0, j_deep, 0, 1);
  rec.sigma_top = std::abs(exT.values[exT.values.size() - 1]);
  double scale = std::max({rec.sigma_top, std::abs(exS.values[exS.values.size() - 1]),
                           1e-300});
  rec.compat_defect =
      std::abs(exT.values[exT.values.size() - 1] - exS.values[exS.values.size() - 1]) /
      scale;
  double opn = opnorm_projected(T.mat, g, T.rank);
  rec.both_vanish = rec.sigma_top <= 1e-6 * std::max(opn, 1e-300) &&
                    std::max(rec.in_norm_left, rec.in_norm_right) <=
                        1e-6 * std::max(opn, 1e-300);
  return rec;
}

}  // namespace cylcalc
