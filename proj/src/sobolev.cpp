#include "cylcalc/sobolev.hpp"

#include <random>

namespace cylcalc {

namespace {

// forward 2-D DFT of one component, (n_t, n_x) layout matching dft2
MatrixXcd to_freq(const CylinderGrid& g, const VectorXcd& u, int comp) {
  MatrixXcd A(g.n_t, g.link.n_x);
  int off = comp * g.n_points();
  for (int i = 0; i < g.link.n_x; ++i)
    for (int j = 0; j < g.n_t; ++j) A(j, i) = u[off + g.index(i, j)];
  return dft2(A);
}

void from_freq(const CylinderGrid& g, const MatrixXcd& A, VectorXcd& u, int comp) {
  MatrixXcd B = idft2(A);
  int off = comp * g.n_points();
  for (int i = 0; i < g.link.n_x; ++i)
    for (int j = 0; j < g.n_t; ++j) u[off + g.index(i, j)] = B(j, i);
}

void check_margin(const CylinderGrid& g, const VectorXcd& u) {
  double scale = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
  int rank = int(u.size()) / g.n_points();
  for (int c = 0; c < rank; ++c)
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j)
        if (!g.in_margin_interior(j) &&
            std::abs(u[c * g.n_points() + g.index(i, j)]) > 1e-10 * scale)
          throw std::runtime_error("section does not vanish in the truncation margin");
}

}  // namespace

VectorXcd apply_weight(const CylinderGrid& g, const VectorXcd& u, double s) {
  if (s == 0) return u;
  int rank = int(u.size()) / g.n_points();
  VectorXcd out(u.size());
  for (int c = 0; c < rank; ++c) {
    MatrixXcd A = to_freq(g, u, c);
    for (int i = 0; i < g.link.n_x; ++i) {
      double xi = g.link.xi(i);
      for (int b = 0; b < g.n_t; ++b) {
        double tau = g.tau(b);
        A(b, i) *= std::pow(1.0 + xi * xi + tau * tau, s / 2.0);
      }
    }
    from_freq(g, A, out, c);
  }
  return out;
}

double fourier_norm(const CylinderGrid& g, const VectorXcd& u, double s) {
  return l2_norm(g, apply_weight(g, u, s));
}

double covariant_norm(const CylinderGrid& g, const VectorXcd& u, int k) {
  check_margin(g, u);
  int rank = int(u.size()) / g.n_points();
  double total = 0;
  for (int c = 0; c < rank; ++c) {
    MatrixXcd A = to_freq(g, u, c);
    // ||nabla^j u||^2 = sum over freq of (xi^2 + tau^2)^j |u_hat|^2 (flat metric)
    for (int j = 0; j <= k; ++j) {
      double acc = 0;
      for (int i = 0; i < g.link.n_x; ++i) {
        double xi = g.link.xi(i);
        for (int b = 0; b < g.n_t; ++b) {
          double tau = g.tau(b);
          acc += std::pow(xi * xi + tau * tau, j) * std::norm(A(b, i));
        }
      }
      total += acc;
    }
  }
  // Parseval: sum over freq |u_hat|^2 = n_x n_t * sum over points |u|^2
  return std::sqrt(total / (g.link.n_x * g.n_t) * g.quad_weight());
}

namespace {

// H^m norm of a section supported near center c through a zero-padded window
double band_norm(const CylinderGrid& g, const VectorXcd& phi2u, double m, double c,
                 double half_width) {
  double ht = g.h_t();
  int nw = std::max(8, int(std::lround(2 * half_width / ht)));
  int j0 = int(std::lround((c - half_width - g.t_min) / ht));
  double Tw = nw * ht;
  double acc = 0;
  for (int i = 0; i < g.link.n_x; ++i) {
    VectorXcd w = VectorXcd::Zero(nw);
    for (int r = 0; r < nw; ++r) {
      int j = j0 + r;
      if (j >= 0 && j < g.n_t) w[r] = phi2u[g.index(i, j)];
    }
    VectorXcd wh = dft(w);
    for (int b = 0; b < nw; ++b) {
      int wr = ((b + nw / 2) % nw + nw) % nw - nw / 2;
      double tau = 2 * M_PI * wr / Tw;
      acc += std::pow(1.0 + tau * tau, m) * std::norm(wh[b]);
    }
  }
  return acc / nw * g.quad_weight();
}

}  // namespace

double partition_norm(const CylinderGrid& g, const PartitionOfUnity& pou,
                      const VectorXcd& u, double m, double R) {
  // phi_0 = central bands combined; interior bands contribute individually
  VectorXcd central = VectorXcd::Zero(u.size());
  double total = 0;
  for (size_t q = 0; q < pou.centers.size(); ++q) {
    double c = pou.centers[q];
    VectorXcd pu(u.size());
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j) {
        double p2 = pou.phis[q][j] * pou.phis[q][j];
        pu[g.index(i, j)] = p2 * u[g.index(i, j)];
      }
    if (std::abs(c) <= R) {
      central += pu;
    } else {
      if (pu.cwiseAbs().maxCoeff() < 1e-300) continue;
      total += band_norm(g, pu, m, c, 4.0);
    }
  }
  if (central.cwiseAbs().maxCoeff() > 0) total += band_norm(g, central, m, 0.0, R + 4.0);
  return std::sqrt(total);
}

double weighted_norm(const CylinderGrid& g, const CutoffProfile& cut,
                     const VectorXcd& u, int k, double s) {
  VectorXcd v(u.size());
  int rank = int(u.size()) / g.n_points();
  for (int c = 0; c < rank; ++c)
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j) {
        double r = cut.rho(g.t(j));
        v[c * g.n_points() + g.index(i, j)] =
            u[c * g.n_points() + g.index(i, j)] * std::pow(r, -double(k));
      }
  return fourier_norm(g, v, s);
}

namespace {

double power_iteration(const std::function<VectorXcd(const VectorXcd&)>& applyAHA,
                       int n, int iters, double tol) {
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> N01;
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(N01(rng), N01(rng));
  v.normalize();
  double lam = 0;
  for (int it = 0; it < iters; ++it) {
    VectorXcd w = applyAHA(v);
    double nl = w.norm();
    if (nl == 0) return 0;
    w /= nl;
    if (std::abs(nl - lam) < tol * std::max(nl, 1e-300) && it > 4) {
      lam = nl;
      break;
    }
    lam = nl;
    v = w;
  }
  return std::sqrt(lam);
}

}  // namespace

double opnorm_projected(const ApplyFn& apply, const ApplyFn& apply_adj,
                        const CylinderGrid& g, int rank, int iters, double tol) {
  int n = rank * g.n_points();
  VectorXd proj(n);
  for (int c = 0; c < rank; ++c)
    for (int p = 0; p < g.n_points(); ++p)
      proj[c * g.n_points() + p] = g.in_margin_interior(g.j_of(p)) ? 1.0 : 0.0;
  auto AHA = [&](const VectorXcd& v) {
    VectorXcd w = proj.asDiagonal() * apply(VectorXcd(proj.asDiagonal() * v));
    return VectorXcd(proj.asDiagonal() * apply_adj(VectorXcd(proj.asDiagonal() * w)));
  };
  return power_iteration(AHA, n, iters, tol);
}

double opnorm_projected(const MatrixXcd& A, const CylinderGrid& g, int rank, int iters,
                        double tol) {
  return opnorm_projected([&](const VectorXcd& v) { return VectorXcd(A * v); },
                          [&](const VectorXcd& v) { return VectorXcd(A.adjoint() * v); },
                          g, rank, iters, tol);
}

double opnorm_weighted(const ApplyFn& apply, const ApplyFn& apply_adj,
                       const CylinderGrid& g, int rank, double s_in, double s_out,
                       int iters, double tol) {
  auto fwd = [&](const VectorXcd& v) {
    return apply_weight(g, apply(apply_weight(g, v, -s_in)), s_out);
  };
  // the Fourier weights are self-adjoint, so the adjoint chain reverses them
  auto adj = [&](const VectorXcd& v) {
    return apply_weight(g, apply_adj(apply_weight(g, v, s_out)), -s_in);
  };
  return opnorm_projected(fwd, adj, g, rank, iters, tol);
}

double mapping_property_check(const OperatorMatrix& P, double s) {
  return opnorm_weighted(
      [&](const VectorXcd& v) { return VectorXcd(P.mat * v); },
      [&](const VectorXcd& v) { return VectorXcd(P.mat.adjoint() * v); }, *P.grid,
      P.rank, s, s - P.order);
}

}  // namespace cylcalc
