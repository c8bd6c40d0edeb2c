#pragma once

#include "cylcalc/calculus.hpp"
#include "cylcalc/report.hpp"
#include "cylcalc/sobolev.hpp"

namespace cylcalc {

struct EndReport {
  std::string end;
  bool indicial_ok = false;
  double min_sv = 0;
  double argmin_tau = 0;
  double large_tau_certificate = 0;
  double handoff_radius = 0;
  std::vector<double> noninvertible_taus;  // refined sub-tolerance locations
  std::string failure;                     // set when the limit extraction failed
};

struct FredholmReport {
  bool verdict = false;
  bool adn_elliptic = false;
  double adn_min_det = 0;
  double tol_sv = 0;
  std::vector<EndReport> per_end;
  std::string to_json() const;
};

/// Scan grid on [-tau_max, tau_max]; tau_max <= 0 selects the default
/// min(4 * max link frequency, 0.95 * axial Nyquist).
VectorXd default_tau_grid(const CylinderGrid& g, double tau_max = 0, int points = 257);

/// Fredholm criterion: ADN ellipticity plus invertibility of the weighted
/// indicial family on every end, scanned over tau_grid with local refinement.
FredholmReport fredholm_verdict(const ADNSystem& sys, double m,
                                const VectorXd& tau_grid, double tol_ell = 0,
                                double tol_sv = 0);

/// Same criterion for a scalar x,t-independent symbol, evaluated through the
/// per-frequency convolution kernels (block-diagonal over the link, so large
/// link grids stay cheap). Both ends coincide.
FredholmReport fredholm_verdict_multiplier(const FullSymbol& a,
                                           const ClassicalSymbol& symb,
                                           const GridPtr& grid, double m,
                                           const VectorXd& tau_grid,
                                           double tol_ell = 0, double tol_sv = 0);

struct CompactnessReport {
  double sigma0_rel = 0;      // top-scale symbol magnitude / operator norm
  double sigma0_threshold = 0;
  double in_norm_rel = 0;     // max end limit-operator norm / operator norm
  double op_norm = 0;
  std::vector<double> singular_tail;  // quartile singular values of the support block
  bool verdict = false;
  std::string failure;
  std::string to_json() const;
};

CompactnessReport compactness_check(const OperatorMatrix& P);

/// CalculusMembershipReport: evidence that an operator (typically a dense
/// inverse) lies in the essentially-translation-invariant calculus.
struct MembershipReport {
  double inv_part_residual = 0;
  double cauchy_gap = 0;
  std::vector<double> decay_exponents;  // per probe window, should exceed p
  std::vector<double> weighted_sup;     // remainder sup-norms per weight pair
  double schwartz_remainder_decay = 0;
  bool verdict = false;
  std::string to_json() const;
};

struct InversionResult {
  OperatorMatrix inverse;  // rank = k, component-major stacked
  MembershipReport membership;
  double min_singular = 0;
  double max_singular = 0;
  double atkinson_sigma0 = 0;  // compactness signals of 1 - QT
  double atkinson_in_norm = 0;
};

InversionResult invert_and_verify(const ADNSystem& sys, double m, double tol_inv = 0);
InversionResult invert_and_verify(const OperatorMatrix& T,
                                  const ClassicalSymbol& symb, double m,
                                  double tol_inv = 0);

struct JointRecord {
  double in_norm_left = 0, in_norm_right = 0;
  double sigma_top = 0;
  double compat_defect = 0;  // sigma^R(In T) vs R_inf(sigma T), relative
  bool both_vanish = false;
  std::string to_json() const;
};

JointRecord in_sigma_joint(const OperatorMatrix& T);

/// Stacked dense matrix as a rank-k OperatorMatrix (for membership checks).
OperatorMatrix adn_as_operator(const ADNSystem& sys);

}  // namespace cylcalc
