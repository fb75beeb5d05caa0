#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace iso {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

// Run the full acceptance suite, printing one pass/fail line per criterion.
// Tolerances are pinned inside; returns all results.
std::vector<CriterionResult> run_acceptance(std::ostream& out);

}  // namespace iso
