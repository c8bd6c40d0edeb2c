#include "cylcalc/quantize.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace cylcalc {

KernelField kernel_of(const OperatorMatrix& P) {
  KernelField K;
  K.values = P.mat / P.grid->quad_weight();
  K.grid = P.grid;
  K.rank = P.rank;
  return K;
}

OperatorMatrix operator_from_kernel(const KernelField& K, double order, double eps,
                                    double R, CalcTag tag) {
  OperatorMatrix P;
  P.mat = K.values * K.grid->quad_weight();
  P.grid = K.grid;
  P.rank = K.rank;
  P.order = order;
  P.eps = eps;
  P.R = R;
  P.tag = tag;
  return P;
}

namespace {

// exact lattice realization of a polynomial symbol: sum of coefficient
// multiplications against spectral derivative kernels
OperatorMatrix quantize_polynomial(const FullSymbol& a, const GridPtr& grid) {
  const auto& g = *grid;
  int dx = a.poly->first, dt = a.poly->second;
  int nx = g.link.n_x, nt = g.n_t;
  // coefficient extraction on integer frequency nodes via Vandermonde solves
  Eigen::MatrixXd Vx(dx + 1, dx + 1), Vt(dt + 1, dt + 1);
  for (int r = 0; r <= dx; ++r)
    for (int c = 0; c <= dx; ++c) Vx(r, c) = std::pow(double(r), c);
  for (int r = 0; r <= dt; ++r)
    for (int c = 0; c <= dt; ++c) Vt(r, c) = std::pow(double(r), c);
  Eigen::MatrixXd Vxi = Vx.inverse(), Vti = Vt.inverse();

  // spectral kernels for xi^p and tau^q (the i-factors live in the symbol)
  std::vector<VectorXcd> Kx(dx + 1), Kt(dt + 1);
  for (int p = 0; p <= dx; ++p) {
    VectorXcd mult(nx);
    for (int m = 0; m < nx; ++m) mult[m] = std::pow(Complex(g.link.xi(m), 0), p);
    Kx[p] = idft(mult);
  }
  for (int q = 0; q <= dt; ++q) {
    VectorXcd mult(nt);
    for (int b = 0; b < nt; ++b) mult[b] = std::pow(Complex(g.tau(b), 0), q);
    Kt[q] = idft(mult);
  }

  OperatorMatrix P;
  P.grid = grid;
  P.order = a.order;
  P.tag = CalcTag::inv;
  P.R = a.R_a;
  P.eps = (dx == 0 && dt == 0) ? 0.0 : kUnbounded;
  P.bicirculant = !a.depends_x && !a.depends_t;
  P.mat = MatrixXcd::Zero(g.n_points(), g.n_points());

  MatrixXcd samples(dx + 1, dt + 1);
  MatrixXcd coeff(dx + 1, dt + 1);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nt; ++j) {
      for (int r = 0; r <= dx; ++r)
        for (int c = 0; c <= dt; ++c)
          samples(r, c) = a.eval(g.link.x(i), g.t(j), double(r), double(c));
      coeff = Vxi * samples * Vti.transpose();
      // mat(p, q) = c(p) * Kx(i_p - i_q) * Kt(j_p - j_q)
      int p0 = g.index(i, j);
      for (int ii = 0; ii < nx; ++ii) {
        int di = ((i - ii) % nx + nx) % nx;
        for (int jj = 0; jj < nt; ++jj) {
          int dj = ((j - jj) % nt + nt) % nt;
          Complex v = 0;
          for (int p = 0; p <= dx; ++p)
            for (int q = 0; q <= dt; ++q)
              if (coeff(p, q) != 0.0) v += coeff(p, q) * Kx[p][di] * Kt[q][dj];
          if (v != 0.0) P.mat(p0, g.index(ii, jj)) = v;
        }
      }
    }
  return P;
}

OperatorMatrix quantize_cutoff(const FullSymbol& a, const GridPtr& grid,
                               const CutoffProfile& chi) {
  const auto& g = *grid;
  int nx = g.link.n_x, nt = g.n_t;
  double hx = g.link.h(), ht = g.h_t();
  if (a.R_a + chi.chi_outer >= g.R_inv)
    throw std::invalid_argument(
        "quantize: symbol varies beyond the grid's invariance region "
        "(R_a + chi_outer >= R_inv)");

  // chi table and admissible offsets
  int djmax = std::min(nt / 2 - 1, int(std::floor(chi.chi_outer / ht)));
  int dimax = std::min(nx / 2, int(std::floor(chi.chi_outer / hx)));
  MatrixXcd chitab = MatrixXcd::Zero(nx, nt);
  for (int di = -dimax; di <= dimax; ++di)
    for (int dj = -djmax; dj <= djmax; ++dj) {
      double d = std::hypot(g.link.arc(di, 0), dj * ht);
      if (d < chi.chi_outer)
        chitab((di % nx + nx) % nx, (dj % nt + nt) % nt) = chi.chi(d);
    }

  OperatorMatrix P;
  P.grid = grid;
  P.order = a.order;
  P.tag = CalcTag::inv;
  P.eps = chi.chi_outer;
  P.R = a.R_a + chi.chi_outer;
  P.bicirculant = false;
  P.mat = MatrixXcd::Zero(g.n_points(), g.n_points());

  MatrixXcd A(nt, nx);  // sample layout matching dft2 (column-major (n1, n0))
  auto fill_row = [&](int i, int j, const MatrixXcd& gtab) {
    int p = g.index(i, j);
    for (int di = -dimax; di <= dimax; ++di) {
      int qi = ((i + di) % nx + nx) % nx;
      for (int dj = -djmax; dj <= djmax; ++dj) {
        int qj = j + dj;  // true offset: no t-wrap across the ends
        if (qj < 0 || qj >= nt) continue;
        Complex c = chitab((di % nx + nx) % nx, (dj % nt + nt) % nt);
        if (c == 0.0) continue;
        Complex v = c * gtab(((dj % nt) + nt) % nt, ((di % nx) + nx) % nx) * hx * ht;
        P.mat(p, g.index(qi, qj)) = v;
      }
    }
  };

  double LT = g.link.L_circ * g.T();
  if (!a.depends_x && !a.depends_t) {
    for (int m = 0; m < nx; ++m)
      for (int b = 0; b < nt; ++b) A(b, m) = a.eval(0, 0, g.link.xi(m), g.tau(b));
    MatrixXcd gtab = dft2(A) / LT;  // g(z) = (1/LT) sum a e^{-i<w,z>}
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nt; ++j) fill_row(i, j, gtab);
  } else if (!a.depends_x) {
    for (int j = 0; j < nt; ++j) {
      for (int m = 0; m < nx; ++m)
        for (int b = 0; b < nt; ++b) A(b, m) = a.eval(0, g.t(j), g.link.xi(m), g.tau(b));
      MatrixXcd gtab = dft2(A) / LT;
      for (int i = 0; i < nx; ++i) fill_row(i, j, gtab);
    }
  } else {
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nt; ++j) {
        for (int m = 0; m < nx; ++m)
          for (int b = 0; b < nt; ++b)
            A(b, m) = a.eval(g.link.x(i), g.t(j), g.link.xi(m), g.tau(b));
        MatrixXcd gtab = dft2(A) / LT;
        fill_row(i, j, gtab);
      }
  }
  return P;
}

}  // namespace

OperatorMatrix quantize(const FullSymbol& a, const GridPtr& grid,
                        const CutoffProfile& chi) {
  if (a.R_a >= grid->R_inv)
    throw std::invalid_argument("quantize: symbol varies beyond the grid's R_inv");
  if (a.poly) return quantize_polynomial(a, grid);
  return quantize_cutoff(a, grid, chi);
}

// ------------------------------------------------------- oscillatory testing

namespace {

VectorXd extraction_window(const CylinderGrid& g) {
  // 1 on the core, 0 within the margin band
  double wall = g.t_max - g.margin - g.h_t();
  double plateau = std::max(wall - 6.0, wall * 0.5);
  VectorXd W(g.n_t);
  for (int j = 0; j < g.n_t; ++j) {
    double a = std::abs(g.t(j));
    W[j] = 1.0 - smooth_step((a - plateau) / (wall - plateau));
  }
  return W;
}

}  // namespace

ExtractionResult oscillatory_symbol_extract_apply(
    const std::function<VectorXcd(const VectorXcd&)>& apply, const CylinderGrid& g,
    double order, int i0, int j0, int ray_a, int ray_b, double alias_guard) {
  double base_xi = 2 * M_PI / g.link.L_circ, base_tau = 2 * M_PI / g.T();
  double smax_x = ray_a ? alias_guard * (M_PI / g.link.h()) / (std::abs(ray_a) * base_xi)
                        : std::numeric_limits<double>::infinity();
  double smax_t = ray_b ? alias_guard * (M_PI / g.h_t()) / (std::abs(ray_b) * base_tau)
                        : std::numeric_limits<double>::infinity();
  int smax = int(std::min(smax_x, smax_t));
  if (smax < 2) throw std::runtime_error("oscillatory extraction: all scales aliased");
  int slo = std::max(2, int(std::ceil(0.55 * smax)));
  if (smax - slo < 2) slo = std::max(2, smax - 3);

  VectorXd W = extraction_window(g);
  ExtractionResult out;
  std::vector<Complex> vals;
  for (int s = slo; s <= smax; ++s) {
    double ex = s * ray_a * base_xi, et = s * ray_b * base_tau;
    VectorXcd e(g.n_points());
    for (int i = 0; i < g.link.n_x; ++i)
      for (int j = 0; j < g.n_t; ++j)
        e[g.index(i, j)] =
            std::exp(Complex(0, ex * g.link.x(i) + et * g.t(j))) * W[j];
    VectorXcd v = apply(e);
    Complex val = v[g.index(i0, j0)] *
                  std::exp(Complex(0, -(ex * g.link.x(i0) + et * g.t(j0))));
    out.lambdas.push_back(std::hypot(ex, et));
    vals.push_back(val);
  }
  out.values = Eigen::Map<VectorXcd>(vals.data(), vals.size());
  out.top_scale = out.lambdas.back();

  int nsc = int(out.lambdas.size());
  int ncol = nsc >= 4 ? 3 : 2;
  MatrixXcd Afit(nsc, ncol);
  VectorXcd rhs(nsc);
  for (int r = 0; r < nsc; ++r) {
    double lam = out.lambdas[r];
    for (int c = 0; c < ncol; ++c) Afit(r, c) = std::pow(lam, -double(c));
    rhs[r] = vals[r] / std::pow(lam, order);
  }
  VectorXcd coef = Afit.colPivHouseholderQr().solve(rhs);
  out.c0 = coef[0];
  return out;
}

ExtractionResult oscillatory_symbol_extract(const OperatorMatrix& P, int i0, int j0,
                                            int ray_a, int ray_b, double alias_guard) {
  return oscillatory_symbol_extract_apply(
      [&](const VectorXcd& v) { return VectorXcd(P.mat * v); }, *P.grid, P.order, i0,
      j0, ray_a, ray_b, alias_guard);
}

// ------------------------------------------------------- kernel asymptotics

namespace {

KernelAsymptotics fit_samples(const std::vector<std::vector<std::pair<double, Complex>>>&
                                  ray_samples,
                              double m, int n_dim, int n_fit, double max_residual) {
  KernelAsymptotics out;
  out.order = m;
  out.n_dim = n_dim;
  bool logs = (-m > 0) && std::abs(-m - std::round(-m)) < 1e-12;
  out.log_terms = logs;
  for (int j = 0; j < n_fit; ++j) {
    double p = -n_dim - m + j;
    out.powers.push_back(p);
    out.with_log.push_back(false);
    if (logs && p >= -1e-12) {
      out.powers.push_back(p);
      out.with_log.push_back(true);
    }
  }
  int ncol = int(out.powers.size());
  double rss = 0, tss = 0, cond = 0;
  for (const auto& samples : ray_samples) {
    int nr = int(samples.size());
    if (nr < ncol + 1)
      throw std::runtime_error("kernel_asymptotics_fit: too few samples on a ray");
    MatrixXcd A(nr, ncol);
    VectorXcd rhs(nr);
    for (int r = 0; r < nr; ++r) {
      double d = samples[r].first;
      double w = 1.0 / std::max(std::abs(samples[r].second),
                                1e-6 * std::abs(samples[0].second));
      for (int c = 0; c < ncol; ++c)
        A(r, c) = std::pow(d, out.powers[c]) * (out.with_log[c] ? std::log(d) : 1.0) * w;
      rhs[r] = samples[r].second * w;
    }
    Eigen::JacobiSVD<MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    cond = std::max(cond, svd.singularValues()(0) /
                              std::max(svd.singularValues()(ncol - 1), 1e-300));
    VectorXcd coef = svd.solve(rhs);
    out.coefficients.push_back(coef);
    rss += (A * coef - rhs).squaredNorm();
    tss += rhs.squaredNorm();
  }
  out.residual = std::sqrt(rss / std::max(tss, 1e-300));
  out.conditioning = cond;
  if (out.residual > max_residual)
    throw std::runtime_error("kernel_asymptotics_fit: residual " +
                             std::to_string(out.residual) +
                             " exceeds tolerance; operator is not classical of order " +
                             std::to_string(m) + " at grid scale");
  return out;
}

}  // namespace

KernelAsymptotics kernel_asymptotics_fit(const OperatorMatrix& P, double claimed_order,
                                         int n_fit, double max_residual) {
  const auto& g = *P.grid;
  if (claimed_order >= 0)
    throw std::invalid_argument("kernel_asymptotics_fit: order must be negative");
  double r_inj = std::min(g.link.L_circ / 2.0, g.T() / 2.0);
  // grid-aligned rays; sample between 2h and r_inj/2
  std::vector<std::pair<int, int>> dirs{{0, 1}, {0, -1}, {1, 0}, {-1, 0}, {1, 1}, {1, -1}};
  // base points: one per end (deep) and one central
  std::vector<std::pair<int, int>> bases;
  int j_left = int((g.R_inv + (std::isfinite(P.R) ? P.R : g.R_inv)) / 2 / g.h_t());
  bases.push_back({0, g.n_t / 2});
  bases.push_back({1, g.n_t / 2 + 3});
  int j_deep = int(std::floor((-(std::isfinite(P.R) ? P.R : g.R_inv) - 2.0 - g.t_min) /
                              g.h_t() / 2));
  bases.push_back({0, std::max(4, j_deep)});
  (void)j_left;

  std::vector<std::vector<std::pair<double, Complex>>> samples;
  for (auto [i0, j0] : bases)
    for (auto [da, db] : dirs) {
      double step = std::hypot(da * g.link.h(), db * g.h_t());
      std::vector<std::pair<double, Complex>> ray;
      for (int k = 1;; ++k) {
        double d = k * step;
        if (d <= 2 * std::max(g.link.h(), g.h_t())) continue;
        if (d > r_inj / 2) break;
        int qi = ((i0 + k * da) % g.link.n_x + g.link.n_x) % g.link.n_x;
        int qj = j0 + k * db;
        if (qj < 0 || qj >= g.n_t) break;
        ray.push_back({d, P.kernel(g.index(i0, j0), g.index(qi, qj))});
      }
      if (ray.size() >= 4) samples.push_back(std::move(ray));
    }
  auto out = fit_samples(samples, claimed_order, 2, n_fit, max_residual);

  // translation invariance of the leading coefficient between base points
  double drift = 0;
  if (samples.size() >= 2 && !out.coefficients.empty()) {
    Complex c0 = out.coefficients.front()(0);
    for (const auto& c : out.coefficients)
      drift = std::max(drift, std::abs(c(0) - c0));
    drift /= std::max(std::abs(c0), 1e-300);
  }
  out.invariance_defect = drift;
  return out;
}

KernelAsymptotics kernel_asymptotics_fit_line(const RestrictedOperator& S,
                                              double claimed_order, int n_fit,
                                              double max_residual) {
  const auto& g = *S.grid;
  double ht = g.h_t();
  std::vector<std::vector<std::pair<double, Complex>>> samples;
  std::vector<int> rows{g.n_t / 2, g.n_t / 4};
  for (size_t ln = 0; ln < S.x_indices.size(); ++ln)
    for (int row : rows)
      for (int dir : {+1, -1}) {
        std::vector<std::pair<double, Complex>> ray;
        for (int k = 3; k * ht <= 4.0; ++k) {
          int col = row + dir * k;
          if (col < 0 || col >= g.n_t) break;
          ray.push_back({k * ht, S.mat(ln * g.n_t + row, ln * g.n_t + col) / ht});
        }
        if (ray.size() >= 5) samples.push_back(std::move(ray));
      }
  return fit_samples(samples, claimed_order, 1, n_fit, max_residual);
}

// ------------------------------------------------------- restriction / export

RestrictedOperator restrict_kernel(const OperatorMatrix& P,
                                   const std::vector<int>& x_indices,
                                   double order_margin) {
  const int q = 1;  // codimension of a union of vertical lines
  if (!(P.order < -double(q) + order_margin))
    throw std::invalid_argument(
        "restrict_kernel: order " + std::to_string(P.order) +
        " violates the restriction threshold (needs order < " +
        std::to_string(-double(q) + order_margin) + ")");
  const auto& g = *P.grid;
  RestrictedOperator S;
  S.grid = P.grid;
  S.x_indices = x_indices;
  S.order = P.order + q;
  S.eps = P.eps;
  S.R = P.R;
  S.tag = P.tag;
  S.circulant = P.bicirculant;
  int nl = int(x_indices.size());
  S.mat.resize(nl * g.n_t, nl * g.n_t);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b)
      for (int j = 0; j < g.n_t; ++j)
        for (int jp = 0; jp < g.n_t; ++jp)
          S.mat(a * g.n_t + j, b * g.n_t + jp) =
              P.kernel(g.index(x_indices[a], j), g.index(x_indices[b], jp)) * g.h_t();
  return S;
}

void write_kernel_csv(const std::string& path, const MatrixXcd& k) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[128];
  for (Eigen::Index r = 0; r < k.rows(); ++r)
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%lld,%lld,%.17g,%.17g\n", (long long)r,
                    (long long)c, k(r, c).real(), k(r, c).imag());
      out << buf;
    }
}

void write_kernel_bin(const std::string& path, const MatrixXcd& k) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  char header[16] = {0};
  std::memcpy(header, "CYLK", 4);
  std::uint32_t rows = std::uint32_t(k.rows()), cols = std::uint32_t(k.cols());
  std::memcpy(header + 4, &rows, 4);
  std::memcpy(header + 8, &cols, 4);
  out.write(header, 16);
  // row-major, each entry as little-endian (re, im) doubles
  for (Eigen::Index r = 0; r < k.rows(); ++r)
    for (Eigen::Index c = 0; c < k.cols(); ++c) {
      double v[2] = {k(r, c).real(), k(r, c).imag()};
      out.write(reinterpret_cast<const char*>(v), 16);
    }
}

MatrixXcd read_kernel_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char header[16];
  in.read(header, 16);
  if (std::memcmp(header, "CYLK", 4) != 0)
    throw std::runtime_error("bad kernel file magic");
  std::uint32_t rows, cols;
  std::memcpy(&rows, header + 4, 4);
  std::memcpy(&cols, header + 8, 4);
  MatrixXcd k(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r)
    for (std::uint32_t c = 0; c < cols; ++c) {
      double v[2];
      in.read(reinterpret_cast<char*>(v), 16);
      k(r, c) = Complex(v[0], v[1]);
    }
  return k;
}

}  // namespace cylcalc
