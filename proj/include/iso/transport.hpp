#pragma once

#include <vector>

#include "iso/cost.hpp"
#include "iso/distribution.hpp"

namespace iso {

// Transport plan with pinned marginals.
struct Coupling {
  std::vector<std::vector<double>> plan;
  Distribution row_marginal;
  Distribution col_marginal;

  // Max residual of row/column sums against the stated marginals.
  double marginal_residual() const;
};

// Kantorovich potential pair with f_i + g_j <= c_ij.
struct DualPotentials {
  std::vector<double> f;
  std::vector<double> g;

  // min over (i,j) of c_ij - f_i - g_j; feasibility means >= -1e-11.
  double feasibility_slack(const CostMatrix& c) const;
};

struct OtResult {
  double value;
  Coupling coupling;
  DualPotentials potentials;
};

// Exact discrete OT by the transportation simplex (Bland's anti-cycling rule).
// Zero-mass rows/columns are dropped before solving and reinserted as zeros.
// Potentials are normalized so f = 0 on the first support atom of q_x.
OtResult ot_solve(const Distribution& q_x, const Distribution& q_y,
                  const CostMatrix& c);

// Primal value and plan only.
std::pair<double, Coupling> ot_cost(const Distribution& q_x, const Distribution& q_y,
                                    const CostMatrix& c);

// Dual value (q_x(f) + q_y(g)) and potentials.
std::pair<double, DualPotentials> ot_dual(const Distribution& q_x,
                                          const Distribution& q_y,
                                          const CostMatrix& c);

// Fast-path OT value: closed form for 2x2 and Hamming costs, simplex otherwise.
double ot_value(const Distribution& q_x, const Distribution& q_y,
                const CostMatrix& c);

// sum_w w(w) * ot_value(q_x[w], q_y[w], c).
double conditional_ot(const Kernel& q_x, const Kernel& q_y, const Distribution& w,
                      const CostMatrix& c);

}  // namespace iso
