#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cylcalc {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs the full acceptance suite on the default grid, printing one pass/fail
/// line per criterion. Returns true when every criterion passes.
bool run_acceptance(std::ostream& os, std::vector<CriterionResult>* results = nullptr);

}  // namespace cylcalc
