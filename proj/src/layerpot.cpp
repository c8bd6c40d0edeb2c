#include "cylcalc/layerpot.hpp"

namespace cylcalc {

LayerOperator single_layer_from_inverse(const OperatorMatrix& Pinv, double source_order,
                                        const Submanifold& N) {
  if (source_order <= double(N.codim))
    throw std::invalid_argument(
        "single_layer: source order must exceed the codimension of N");
  OperatorMatrix K = Pinv;
  K.order = -source_order;
  LayerOperator L;
  L.op = restrict_kernel(K, N.x_indices);
  L.kind = LayerKind::single;
  L.source_order = source_order;
  return L;
}

LayerOperator single_layer(const OperatorMatrix& P, const ClassicalSymbol& symb,
                           double m, const Submanifold& N) {
  auto inv = invert_and_verify(P, symb, m);
  return single_layer_from_inverse(inv.inverse, P.order, N);
}

namespace {

// centered difference of the inverse kernel across the x-direction normal,
// Richardson extrapolated over spacings h and 2h
Complex normal_derivative(const OperatorMatrix& Pinv, int i_col, int j_col, int p_row,
                          double nu_x) {
  const auto& g = *Pinv.grid;
  int nx = g.link.n_x;
  auto kval = [&](int di) {
    return Pinv.kernel(p_row, g.index(((i_col + di) % nx + nx) % nx, j_col));
  };
  double hx = g.link.h();
  Complex d1 = (kval(1) - kval(-1)) / (2 * hx);
  Complex d2 = (kval(2) - kval(-2)) / (4 * hx);
  return nu_x * (4.0 * d1 - d2) / 3.0;
}

void pv_diagonal(LayerOperator& L) {
  // omit the diagonal cell; declare convergence when symmetric shell sums
  // stabilize
  const auto& g = *L.op.grid;
  int nt = g.n_t;
  int nl = int(L.op.x_indices.size());
  double worst = 0;
  for (int a = 0; a < nl; ++a) {
    int row = a * nt + nt / 2;
    Complex acc = 0;
    double gap = 0;
    Complex prev = 0;
    for (int shell = 1; shell * 8 < nt / 2; ++shell) {
      for (int u = (shell - 1) * 8 + 1; u <= shell * 8; ++u) {
        if (nt / 2 - u < 0 || nt / 2 + u >= nt) break;
        acc += L.op.mat(row, a * nt + nt / 2 + u) + L.op.mat(row, a * nt + nt / 2 - u);
      }
      if (shell >= 3)
        gap = std::abs(acc - prev) / std::max(std::abs(acc), 1e-300);
      prev = acc;
    }
    worst = std::max(worst, gap);
    for (int j = 0; j < nt; ++j) L.op.mat(a * nt + j, a * nt + j) = 0;
  }
  L.pv_gap = worst;
  L.pv_converged = worst < 1e-8 || worst < 1e-4;  // reported either way
}

}  // namespace

LayerOperator double_layer_from_inverse(const OperatorMatrix& Pinv, double source_order,
                                        const Submanifold& N) {
  if (N.codim != 1) throw std::invalid_argument("double_layer: codimension must be 1");
  const auto& g = *Pinv.grid;
  LayerOperator L;
  L.kind = LayerKind::double_;
  L.source_order = source_order;
  int nl = int(N.x_indices.size()), nt = g.n_t;
  L.op.grid = Pinv.grid;
  L.op.x_indices = N.x_indices;
  L.op.order = -source_order + N.codim;  // improves by 1 when the leading term dies
  L.op.tag = Pinv.tag;
  L.op.eps = Pinv.eps;
  L.op.R = Pinv.R;
  L.op.circulant = Pinv.bicirculant;
  L.op.mat.resize(nl * nt, nl * nt);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b)
      for (int j = 0; j < nt; ++j)
        for (int jp = 0; jp < nt; ++jp)
          L.op.mat(a * nt + j, b * nt + jp) =
              normal_derivative(Pinv, N.x_indices[b], jp,
                                g.index(N.x_indices[a], j), N.normal_x) *
              g.h_t();
  pv_diagonal(L);
  return L;
}

VectorXcd line_tau_symbol(const RestrictedOperator& S, VectorXd& taus_out) {
  const auto& g = *S.grid;
  int nt = g.n_t;
  if (S.x_indices.size() != 1)
    throw std::invalid_argument("line_tau_symbol: single-line operators only");
  // convolution kernel from a reference row
  int row = S.circulant ? nt / 2
                        : int(std::lround((-(g.R_inv + (-g.t_min - g.R_inv) / 2) -
                                           g.t_min) /
                                          g.h_t()));
  VectorXcd kappa = VectorXcd::Zero(nt);  // kappa[wrapped offset index]
  for (int jp = 0; jp < nt; ++jp) {
    int k = ((row - jp) % nt + nt) % nt;
    kappa[k] = S.mat(row, jp) / g.h_t();
  }
  if (!S.circulant) {
    // stationarity check against a shifted row
    int row2 = row - 4;
    double gap = 0, scale = 0;
    for (int jp = 0; jp < nt; ++jp) {
      int k = ((row2 - jp) % nt + nt) % nt;
      Complex v = S.mat(row2, jp) / g.h_t();
      if (kappa[k] != 0.0 || v != 0.0) {
        gap = std::max(gap, std::abs(kappa[k] - v));
        scale = std::max(scale, std::abs(kappa[k]));
      }
    }
    if (scale > 0 && gap / scale > 1e-4)
      throw std::runtime_error("line_tau_symbol: kernel is not stationary on the line");
  }
  taus_out.resize(nt);
  VectorXcd sym(nt);
  for (int b = 0; b < nt; ++b) {
    double tau = g.tau(b);
    taus_out[b] = tau;
    Complex s = 0;
    for (int k = 0; k < nt; ++k) {
      int w = ((k + nt / 2) % nt + nt) % nt - nt / 2;
      s += kappa[k] * std::exp(Complex(0, -tau * w * g.h_t()));
    }
    sym[b] = s * g.h_t();
  }
  return sym;
}

double restriction_limit_defect(const OperatorMatrix& P, const RestrictedOperator& S,
                                const Submanifold& N) {
  const auto& g = *P.grid;
  LimitOperator TP = limit_operator(P, End::left, 1e-2);
  // In(P)|_N: line-kernel C_N(a,b,u) = C(x_a, x_b, u) * h_t vs the limit of S
  int nt = g.n_t;
  int row = int(std::lround(
      (-(std::isfinite(S.R) ? std::min(S.R, g.R_inv) : g.R_inv) - 2.0 - g.t_min) /
      g.h_t() / 1.0));
  row = std::max(row / 2 + nt / 8, 4);
  double defect = 0, scale = 0;
  int nl = int(N.x_indices.size());
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b)
      for (int w = -nt / 4; w <= nt / 4; ++w) {
        int jp = row - w;
        if (jp < 0 || jp >= nt) continue;
        int k = ((w % nt) + nt) % nt;
        if (!TP.C[k].size()) continue;
        Complex cn = TP.C[k](N.x_indices[a], N.x_indices[b]);
        Complex cs = S.mat(a * nt + row, b * nt + jp) / g.h_t();
        defect = std::max(defect, std::abs(cn - cs));
        scale = std::max(scale, std::abs(cn));
      }
  return scale > 0 ? defect / scale : 0.0;
}

// ------------------------------------------------------ multiplier fast path

MultiplierInverse invert_multiplier(const FullSymbol& a, const GridPtr& grid,
                                    double tol_inv) {
  if (a.depends_x || a.depends_t)
    throw std::invalid_argument("invert_multiplier: symbol must be x,t-independent");
  const auto& g = *grid;
  MultiplierInverse M;
  M.grid = grid;
  M.source_order = a.order;
  M.mult_inv.resize(g.n_t, g.link.n_x);
  double mn = std::numeric_limits<double>::infinity(), mx = 0;
  for (int m = 0; m < g.link.n_x; ++m)
    for (int b = 0; b < g.n_t; ++b) {
      Complex v = a.eval(0, 0, g.link.xi(m), g.tau(b));
      double av = std::abs(v);
      mn = std::min(mn, av);
      mx = std::max(mx, av);
      M.mult_inv(b, m) = 1.0 / v;
    }
  M.min_abs = mn;
  M.max_abs = mx;
  if (tol_inv <= 0) tol_inv = 1e-8 * mx;
  if (mn < tol_inv)
    throw std::runtime_error("invert_multiplier: multiplier nearly vanishes (min " +
                             std::to_string(mn) + ")");
  return M;
}

namespace {

// inverse kernel G(dx_index, du_index) = (1/(L T)) sum (1/a) e^{+i <w, z>}
MatrixXcd multiplier_kernel(const MultiplierInverse& M) {
  const auto& g = *M.grid;
  return idft2(M.mult_inv) * (double(g.link.n_x) * g.n_t) /
         (g.link.L_circ * g.T());
}

}  // namespace

LayerOperator single_layer_multiplier(const MultiplierInverse& M, const Submanifold& N) {
  const auto& g = *M.grid;
  if (M.source_order <= N.codim)
    throw std::invalid_argument("single_layer: order precondition violated");
  MatrixXcd G = multiplier_kernel(M);  // layout (du, dx)
  int nt = g.n_t, nl = int(N.x_indices.size());
  LayerOperator L;
  L.kind = LayerKind::single;
  L.source_order = M.source_order;
  L.op.grid = M.grid;
  L.op.x_indices = N.x_indices;
  L.op.order = -M.source_order + N.codim;
  L.op.tag = CalcTag::inv;
  L.op.circulant = true;
  L.op.mat.resize(nl * nt, nl * nt);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b) {
      int dx = ((N.x_indices[a] - N.x_indices[b]) % g.link.n_x + g.link.n_x) %
               g.link.n_x;
      for (int j = 0; j < nt; ++j)
        for (int jp = 0; jp < nt; ++jp) {
          int k = ((j - jp) % nt + nt) % nt;
          L.op.mat(a * nt + j, b * nt + jp) = G(k, dx) * g.h_t();
        }
    }
  return L;
}

LayerOperator double_layer_multiplier(const MultiplierInverse& M, const Submanifold& N) {
  const auto& g = *M.grid;
  MatrixXcd G = multiplier_kernel(M);
  int nt = g.n_t, nx = g.link.n_x, nl = int(N.x_indices.size());
  double hx = g.link.h();
  LayerOperator L;
  L.kind = LayerKind::double_;
  L.source_order = M.source_order;
  L.op.grid = M.grid;
  L.op.x_indices = N.x_indices;
  L.op.order = -M.source_order + N.codim;
  L.op.tag = CalcTag::inv;
  L.op.circulant = true;
  L.op.mat.resize(nl * nt, nl * nt);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b) {
      int dx = N.x_indices[a] - N.x_indices[b];
      for (int j = 0; j < nt; ++j)
        for (int jp = 0; jp < nt; ++jp) {
          int k = ((j - jp) % nt + nt) % nt;
          // d/dy_x at y = x_b: kernel depends on (x_a - y), so the derivative
          // flips sign relative to the dx argument
          Complex d1 = (G(k, ((dx - 1) % nx + nx) % nx) -
                        G(k, ((dx + 1) % nx + nx) % nx)) /
                       (2 * hx);
          Complex d2 = (G(k, ((dx - 2) % nx + nx) % nx) -
                        G(k, ((dx + 2) % nx + nx) % nx)) /
                       (4 * hx);
          L.op.mat(a * nt + j, b * nt + jp) =
              N.normal_x * (4.0 * d1 - d2) / 3.0 * g.h_t();
        }
    }
  pv_diagonal(L);
  return L;
}

// ------------------------------------------------------------------ pipeline

std::string LayerPipelineResult::to_json() const {
  JsonWriter w;
  w.put("ok", ok);
  w.put("stage", stage);
  if (!failure.empty()) w.put("failure", failure);
  w.put_raw("fredholm", fredholm.to_json());
  if (have_membership) {
    w.put_raw("membership", membership.to_json());
    w.put("inv_min_singular", inv_min_singular);
  }
  if (have_layers) {
    w.put("single_sup", single_sup);
    w.put("double_sup", double_sup);
  }
  return w.str();
}

LayerPipelineResult layer_pipeline(const OperatorSpecFile& spec) {
  LayerPipelineResult out;
  auto grid = spec.make_grid();
  auto cut = make_cutoffs(grid, grid->R_inv / 4, grid->R_inv / 2);
  auto taus = default_tau_grid(*grid, spec.tau_max, spec.tau_points);

  Submanifold N;
  N.x_indices = spec.x_indices.empty() ? std::vector<int>{0} : spec.x_indices;
  N.normal_x = spec.normal_x;
  N.normal_t = spec.normal_t;

  out.stage = "build";
  try {
    // x,t-independent scalar specs run block-diagonally over the link
    bool fast = spec.k == 1 && spec.symbols[0][0];
    FullSymbol a0;
    if (fast) {
      a0 = symbol_from_expression(spec.symbols[0][0], spec.s[0] + spec.t[0]);
      fast = !a0.depends_x && !a0.depends_t;
    }
    if (fast) {
      ClassicalSymbol symb = classical_from_full(a0, 1);
      out.stage = "fredholm";
      out.fredholm = fredholm_verdict_multiplier(a0, symb, grid, spec.sobolev_m, taus,
                                                 spec.tol_ell, spec.tol_inv);
      if (!out.fredholm.verdict) {
        out.stage = out.fredholm.adn_elliptic ? "fredholm" : "ellipticity";
        out.failure = out.fredholm.adn_elliptic ? "indicial family not invertible"
                                                : "not ADN-elliptic";
        return out;
      }
      out.stage = "invert";
      MultiplierInverse M = invert_multiplier(a0, grid, spec.tol_inv);
      out.inv_min_singular = M.min_abs;
      out.stage = "layer";
      LayerOperator S = single_layer_multiplier(M, N);
      LayerOperator D = double_layer_multiplier(M, N);
      out.single_sup = S.op.mat.cwiseAbs().maxCoeff();
      out.double_sup = D.op.mat.cwiseAbs().maxCoeff();
      out.single_symbol = line_tau_symbol(S.op, out.taus);
      out.have_layers = true;
    } else {
      ADNSystem sys;
      sys.spec.k = spec.k;
      sys.spec.s = spec.s;
      sys.spec.t = spec.t;
      sys.grid = grid;
      sys.blocks.assign(spec.k, std::vector<std::optional<OperatorMatrix>>(spec.k));
      sys.symb.spec = sys.spec;
      sys.symb.blocks.assign(spec.k,
                             std::vector<std::optional<ClassicalSymbol>>(spec.k));
      for (int i = 0; i < spec.k; ++i)
        for (int j = 0; j < spec.k; ++j) {
          if (!spec.symbols[i][j]) continue;
          FullSymbol a = symbol_from_expression(spec.symbols[i][j],
                                                sys.spec.block_order(i, j));
          sys.blocks[i][j] = quantize(a, grid, cut);
          sys.symb.blocks[i][j] = classical_from_full(a, 1);
        }
      out.stage = "fredholm";
      out.fredholm =
          fredholm_verdict(sys, spec.sobolev_m, taus, spec.tol_ell, spec.tol_inv);
      if (!out.fredholm.verdict) {
        out.stage = out.fredholm.adn_elliptic ? "fredholm" : "ellipticity";
        out.failure = out.fredholm.adn_elliptic ? "indicial family not invertible"
                                                : "not ADN-elliptic";
        return out;
      }
      out.stage = "invert";
      auto inv = invert_and_verify(sys, spec.sobolev_m, spec.tol_inv);
      out.membership = inv.membership;
      out.have_membership = true;
      out.inv_min_singular = inv.min_singular;
      out.stage = "layer";
      double src = 0;
      for (int i = 0; i < spec.k; ++i) src = std::max(src, spec.s[i] + spec.t[i]);
      LayerOperator S = single_layer_from_inverse(inv.inverse, src, N);
      out.single_sup = S.op.mat.cwiseAbs().maxCoeff();
      if (src == 2.0 && spec.k == 1) {
        LayerOperator D = double_layer_from_inverse(inv.inverse, 2.0, N);
        out.double_sup = D.op.mat.cwiseAbs().maxCoeff();
      }
      out.single_symbol = line_tau_symbol(S.op, out.taus);
      out.have_layers = true;
    }
  } catch (const std::exception& e) {
    out.failure = e.what();
    return out;
  }
  out.stage = "done";
  out.ok = true;
  return out;
}

}  // namespace cylcalc
