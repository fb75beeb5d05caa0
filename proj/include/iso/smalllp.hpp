#pragma once

#include <vector>

namespace iso {

struct LpResult {
  enum class Status { kOptimal, kInfeasible, kUnbounded };
  Status status;
  double value = 0.0;
  std::vector<double> x;
};

// min c.x subject to A x = b, x >= 0. Dense two-phase simplex with Bland's
// rule; intended for problems with a handful of rows.
LpResult solve_equality_lp(const std::vector<std::vector<double>>& A,
                           const std::vector<double>& b,
                           const std::vector<double>& c);

}  // namespace iso
