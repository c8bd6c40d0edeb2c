#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cylcalc/expr.hpp"
#include "cylcalc/geometry.hpp"

namespace cylcalc {

/// Parsed operator-spec file. Sections: grid, blocks, options, submanifold.
struct OperatorSpecFile {
  // grid
  int n_x = 16;
  double L_circ = 2 * M_PI;
  int n_t = 256;
  double t_extent = 32;
  double R_inv = 8;
  double margin = 8;

  // blocks
  int k = 1;
  std::vector<double> s, t;
  std::vector<std::vector<expr::NodePtr>> symbols;  // k x k, null = zero block

  // options
  double tau_max = 0;      // 0: derived from the grid
  int tau_points = 257;
  double tol_ell = 0;      // 0: relative default
  double tol_inv = 0;
  double t0 = 8;
  int neumann_depth = 3;
  double sobolev_m = 0;

  // submanifold
  std::vector<int> x_indices;
  double normal_x = 1, normal_t = 0;

  GridPtr make_grid() const {
    return build_grid(n_x, L_circ, n_t, t_extent, R_inv, margin);
  }
};

struct SpecError : std::runtime_error {
  int line;
  SpecError(const std::string& msg, int line_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

OperatorSpecFile parse_spec(const std::string& text);
OperatorSpecFile parse_spec_file(const std::string& path);

/// Canonical text form; parse_spec(print_spec(f)) reproduces every field and
/// structurally identical symbol ASTs.
std::string print_spec(const OperatorSpecFile& f);

}  // namespace cylcalc
