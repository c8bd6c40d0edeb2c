#include "cylcalc/specfile.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace cylcalc {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double const_value(const std::string& text, int line) {
  try {
    auto ast = expr::parse(text);
    if (expr::uses_var(ast, expr::Var::x) || expr::uses_var(ast, expr::Var::t) ||
        expr::uses_var(ast, expr::Var::xi) || expr::uses_var(ast, expr::Var::tau))
      throw SpecError("expected a constant", line);
    auto v = expr::eval(ast, {});
    if (v.imag() != 0) throw SpecError("expected a real constant", line);
    return v.real();
  } catch (const expr::ParseError& e) {
    throw SpecError(std::string("bad constant: ") + e.what(), line);
  }
}

std::vector<double> const_list(const std::string& text, int line) {
  std::string s = trim(text);
  if (s.size() < 2 || s.front() != '[' || s.back() != ']')
    throw SpecError("expected a [..] list", line);
  std::vector<double> out;
  std::string body = s.substr(1, s.size() - 2);
  size_t pos = 0;
  while (pos < body.size()) {
    size_t c = body.find(',', pos);
    std::string item = c == std::string::npos ? body.substr(pos) : body.substr(pos, c - pos);
    if (!trim(item).empty()) out.push_back(const_value(item, line));
    if (c == std::string::npos) break;
    pos = c + 1;
  }
  return out;
}

// every bump window that sees t must sit inside (-R, R)
void check_bump_windows(const expr::NodePtr& n, double R, int line) {
  if (n->kind == expr::Kind::call && n->func == "bump" &&
      expr::uses_var(n->args[0], expr::Var::t)) {
    double lo = expr::eval(n->args[1], {}).real();
    double hi = expr::eval(n->args[2], {}).real();
    if (!(lo < hi) || lo <= -R || hi >= R)
      throw SpecError("bump window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                          "] must lie strictly inside (-R_inv, R_inv)",
                      line);
  }
  for (const auto& a : n->args) check_bump_windows(a, R, line);
}

}  // namespace

OperatorSpecFile parse_spec(const std::string& text) {
  OperatorSpecFile f;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::string section;
  bool saw_k = false;
  std::vector<std::tuple<int, int, expr::NodePtr, int>> sym_entries;  // i, j, ast, line

  while (std::getline(in, raw)) {
    ++line;
    std::string l = raw;
    size_t hash = l.find('#');
    if (hash != std::string::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    if (l.back() == '{') {
      section = trim(l.substr(0, l.size() - 1));
      if (section != "grid" && section != "blocks" && section != "options" &&
          section != "submanifold")
        throw SpecError("unknown section '" + section + "'", line);
      continue;
    }
    if (l == "}") {
      section.clear();
      continue;
    }
    size_t eq = l.find('=');
    if (eq == std::string::npos) throw SpecError("expected 'key = value'", line);
    std::string key = trim(l.substr(0, eq));
    std::string val = trim(l.substr(eq + 1));
    if (section == "grid") {
      if (key == "n_x") f.n_x = int(const_value(val, line));
      else if (key == "L_circ") f.L_circ = const_value(val, line);
      else if (key == "n_t") f.n_t = int(const_value(val, line));
      else if (key == "t_extent") f.t_extent = const_value(val, line);
      else if (key == "R_inv") f.R_inv = const_value(val, line);
      else if (key == "margin") f.margin = const_value(val, line);
      else throw SpecError("unknown grid key '" + key + "'", line);
    } else if (section == "blocks") {
      if (key == "k") {
        f.k = int(const_value(val, line));
        saw_k = true;
      } else if (key == "s") {
        f.s = const_list(val, line);
      } else if (key == "t") {
        f.t = const_list(val, line);
      } else if (key.rfind("symbol", 0) == 0) {
        std::istringstream ks(key.substr(6));
        int bi, bj;
        if (!(ks >> bi >> bj)) throw SpecError("expected 'symbol I J = expr'", line);
        try {
          auto ast = expr::parse(val);
          sym_entries.emplace_back(bi, bj, ast, line);
        } catch (const expr::ParseError& e) {
          throw SpecError("symbol parse error at col " + std::to_string(e.col) + ": " +
                              e.what(),
                          line);
        }
      } else {
        throw SpecError("unknown blocks key '" + key + "'", line);
      }
    } else if (section == "options") {
      if (key == "tau_max") f.tau_max = const_value(val, line);
      else if (key == "tau_points") f.tau_points = int(const_value(val, line));
      else if (key == "tol_ell") f.tol_ell = const_value(val, line);
      else if (key == "tol_inv") f.tol_inv = const_value(val, line);
      else if (key == "t0") f.t0 = const_value(val, line);
      else if (key == "neumann_depth") f.neumann_depth = int(const_value(val, line));
      else if (key == "m") f.sobolev_m = const_value(val, line);
      else throw SpecError("unknown options key '" + key + "'", line);
    } else if (section == "submanifold") {
      if (key == "x_indices") {
        for (double v : const_list(val, line)) f.x_indices.push_back(int(v));
      } else if (key == "normal") {
        auto v = const_list(val, line);
        if (v.size() != 2) throw SpecError("normal needs two components", line);
        f.normal_x = v[0];
        f.normal_t = v[1];
      } else {
        throw SpecError("unknown submanifold key '" + key + "'", line);
      }
    } else {
      throw SpecError("key outside any section", line);
    }
  }

  if (!saw_k && !sym_entries.empty()) f.k = 1;
  if (f.s.empty()) f.s.assign(f.k, 0.0);
  if (f.t.empty()) f.t.assign(f.k, 0.0);
  if (int(f.s.size()) != f.k || int(f.t.size()) != f.k)
    throw SpecError("s and t must have k entries", 0);
  f.symbols.assign(f.k, std::vector<expr::NodePtr>(f.k));
  for (auto& [bi, bj, ast, ln] : sym_entries) {
    if (bi < 0 || bi >= f.k || bj < 0 || bj >= f.k)
      throw SpecError("symbol index out of range", ln);
    if (!expr::t_confined_to_bumps(ast))
      throw SpecError("t must appear inside bump(...)", ln);
    check_bump_windows(ast, f.R_inv, ln);
    f.symbols[bi][bj] = ast;
  }
  return f;
}

OperatorSpecFile parse_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

static std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string print_spec(const OperatorSpecFile& f) {
  std::ostringstream o;
  o << "grid {\n";
  o << "  n_x = " << f.n_x << "\n  L_circ = " << fmt(f.L_circ) << "\n  n_t = " << f.n_t
    << "\n  t_extent = " << fmt(f.t_extent) << "\n  R_inv = " << fmt(f.R_inv)
    << "\n  margin = " << fmt(f.margin) << "\n}\n";
  o << "blocks {\n  k = " << f.k << "\n  s = [";
  for (int i = 0; i < f.k; ++i) o << (i ? ", " : "") << fmt(f.s[i]);
  o << "]\n  t = [";
  for (int i = 0; i < f.k; ++i) o << (i ? ", " : "") << fmt(f.t[i]);
  o << "]\n";
  for (int i = 0; i < f.k; ++i)
    for (int j = 0; j < f.k; ++j)
      if (f.symbols[i][j])
        o << "  symbol " << i << " " << j << " = " << expr::pretty_print(f.symbols[i][j])
          << "\n";
  o << "}\noptions {\n";
  o << "  tau_max = " << fmt(f.tau_max) << "\n  tau_points = " << f.tau_points
    << "\n  tol_ell = " << fmt(f.tol_ell) << "\n  tol_inv = " << fmt(f.tol_inv)
    << "\n  t0 = " << fmt(f.t0) << "\n  neumann_depth = " << f.neumann_depth
    << "\n  m = " << fmt(f.sobolev_m) << "\n}\n";
  if (!f.x_indices.empty()) {
    o << "submanifold {\n  x_indices = [";
    for (size_t q = 0; q < f.x_indices.size(); ++q)
      o << (q ? ", " : "") << f.x_indices[q];
    o << "]\n  normal = [" << fmt(f.normal_x) << ", " << fmt(f.normal_t) << "]\n}\n";
  }
  return o.str();
}

}  // namespace cylcalc
