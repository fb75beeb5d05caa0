#include "iso/smalllp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace iso {

namespace {

constexpr double kTol = 1e-9;

struct Tableau {
  size_t m, total;                      // rows, columns excluding rhs
  std::vector<std::vector<double>> t;   // m rows of total+1 (rhs last)
  std::vector<double> obj;              // reduced-cost row, total+1
  std::vector<size_t> basis;            // basic variable per row

  void pivot(size_t row, size_t col) {
    double piv = t[row][col];
    for (double& v : t[row]) v /= piv;
    for (size_t r = 0; r < m; ++r) {
      if (r == row || t[r][col] == 0.0) continue;
      double factor = t[r][col];
      for (size_t j = 0; j <= total; ++j) t[r][j] -= factor * t[row][j];
    }
    if (obj[col] != 0.0) {
      double factor = obj[col];
      for (size_t j = 0; j <= total; ++j) obj[j] -= factor * t[row][j];
    }
    basis[row] = col;
  }

  // Returns false on unboundedness.
  bool run(size_t ncols) {
    for (size_t iter = 0; iter < 100000; ++iter) {
      size_t enter = ncols;
      for (size_t j = 0; j < ncols; ++j)
        if (obj[j] < -kTol) { enter = j; break; }  // Bland
      if (enter == ncols) return true;
      size_t leave = m;
      double best = std::numeric_limits<double>::infinity();
      for (size_t r = 0; r < m; ++r) {
        if (t[r][enter] <= kTol) continue;
        double ratio = t[r][total] / t[r][enter];
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (leave == m || basis[r] < basis[leave]))) {
          best = ratio;
          leave = r;
        }
      }
      if (leave == m) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("smalllp: iteration limit");
  }
};

}  // namespace

LpResult solve_equality_lp(const std::vector<std::vector<double>>& A,
                           const std::vector<double>& b,
                           const std::vector<double>& c) {
  size_t m = A.size(), n = c.size();
  Tableau tab;
  tab.m = m;
  tab.total = n + m;  // artificials appended
  tab.t.assign(m, std::vector<double>(tab.total + 1, 0.0));
  tab.basis.resize(m);
  for (size_t r = 0; r < m; ++r) {
    double sign = b[r] < 0.0 ? -1.0 : 1.0;
    for (size_t j = 0; j < n; ++j) tab.t[r][j] = sign * A[r][j];
    tab.t[r][n + r] = 1.0;
    tab.t[r][tab.total] = sign * b[r];
    tab.basis[r] = n + r;
  }

  // Phase 1: minimize the artificial sum.
  tab.obj.assign(tab.total + 1, 0.0);
  for (size_t r = 0; r < m; ++r)
    for (size_t j = 0; j <= tab.total; ++j)
      if (j < n || j == tab.total) tab.obj[j] -= tab.t[r][j];
  if (!tab.run(tab.total)) throw std::runtime_error("smalllp: phase 1 unbounded");
  if (-tab.obj[tab.total] > 1e-7) return {LpResult::Status::kInfeasible, 0.0, {}};

  // Drive remaining artificials out of the basis where possible.
  for (size_t r = 0; r < m; ++r) {
    if (tab.basis[r] < n) continue;
    size_t col = n;
    for (size_t j = 0; j < n; ++j)
      if (std::fabs(tab.t[r][j]) > 1e-9) { col = j; break; }
    if (col < n) tab.pivot(r, col);
  }

  // Phase 2 with the true objective; forbid artificials by leaving their
  // reduced costs huge.
  tab.obj.assign(tab.total + 1, 0.0);
  for (size_t j = 0; j < n; ++j) tab.obj[j] = c[j];
  for (size_t j = n; j < tab.total; ++j) tab.obj[j] = 1e30;
  for (size_t r = 0; r < m; ++r) {
    if (tab.obj[tab.basis[r]] == 0.0) continue;
    double factor = tab.obj[tab.basis[r]];
    for (size_t j = 0; j <= tab.total; ++j) tab.obj[j] -= factor * tab.t[r][j];
  }
  if (!tab.run(n)) return {LpResult::Status::kUnbounded, 0.0, {}};

  LpResult res{LpResult::Status::kOptimal, 0.0, std::vector<double>(n, 0.0)};
  for (size_t r = 0; r < m; ++r)
    if (tab.basis[r] < n) res.x[tab.basis[r]] = tab.t[r][tab.total];
  for (size_t j = 0; j < n; ++j) res.value += c[j] * res.x[j];
  return res;
}

}  // namespace iso
