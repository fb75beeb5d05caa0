#include "iso/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iso {

double additive_cost(const CostMatrix& c, const std::vector<size_t>& x_seq,
                     const std::vector<size_t>& y_seq) {
  if (x_seq.size() != y_seq.size()) throw dimension_error("additive_cost: length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < x_seq.size(); ++i) s += c(x_seq[i], y_seq[i]);
  return s;
}

double Coupling::marginal_residual() const {
  double worst = 0.0;
  for (size_t i = 0; i < plan.size(); ++i) {
    double rs = 0.0;
    for (double v : plan[i]) rs += v;
    worst = std::max(worst, std::fabs(rs - row_marginal[i]));
  }
  for (size_t j = 0; j < plan.front().size(); ++j) {
    double cs = 0.0;
    for (size_t i = 0; i < plan.size(); ++i) cs += plan[i][j];
    worst = std::max(worst, std::fabs(cs - col_marginal[j]));
  }
  return worst;
}

double DualPotentials::feasibility_slack(const CostMatrix& c) const {
  double worst = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < f.size(); ++i)
    for (size_t j = 0; j < g.size(); ++j)
      worst = std::min(worst, c(i, j) - f[i] - g[j]);
  return worst;
}

namespace {

constexpr double kPivotTol = 1e-11;

// Transportation simplex on strictly positive supplies/demands.
struct SimplexSolver {
  size_t m, n;
  const std::vector<double>& a;
  const std::vector<double>& b;
  std::vector<std::vector<double>> cost;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<char>> basic;
  std::vector<double> u, v;

  SimplexSolver(const std::vector<double>& a_, const std::vector<double>& b_,
                std::vector<std::vector<double>> cost_)
      : m(a_.size()), n(b_.size()), a(a_), b(b_), cost(std::move(cost_)),
        x(m, std::vector<double>(n, 0.0)), basic(m, std::vector<char>(n, 0)),
        u(m), v(n) {}

  void northwest_corner() {
    std::vector<double> ra = a, cb = b;
    size_t i = 0, j = 0;
    while (true) {
      double t = std::min(ra[i], cb[j]);
      x[i][j] += t;
      basic[i][j] = 1;
      ra[i] -= t;
      cb[j] -= t;
      if (i == m - 1 && j == n - 1) break;
      if ((ra[i] <= cb[j] && i < m - 1) || j == n - 1)
        ++i;
      else
        ++j;
    }
  }

  // u_i + v_j = c_ij on basic arcs, rooted at u_0 = 0.
  void compute_potentials() {
    std::vector<char> done_u(m, 0), done_v(n, 0);
    u[0] = 0.0;
    done_u[0] = 1;
    bool progress = true;
    while (progress) {
      progress = false;
      for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < n; ++j) {
          if (!basic[i][j]) continue;
          if (done_u[i] && !done_v[j]) {
            v[j] = cost[i][j] - u[i];
            done_v[j] = 1;
            progress = true;
          } else if (done_v[j] && !done_u[i]) {
            u[i] = cost[i][j] - v[j];
            done_u[i] = 1;
            progress = true;
          }
        }
    }
  }

  // Path of nodes from col j0 to row i0 through the basis tree.
  // Nodes: rows 0..m-1, cols m..m+n-1.
  std::vector<size_t> tree_path(size_t i0, size_t j0) {
    size_t nn = m + n;
    std::vector<int> prev(nn, -1);
    std::vector<size_t> stack{m + j0};
    prev[m + j0] = int(m + j0);
    while (!stack.empty()) {
      size_t node = stack.back();
      stack.pop_back();
      if (node == i0) break;
      if (node < m) {
        for (size_t j = 0; j < n; ++j)
          if (basic[node][j] && prev[m + j] < 0) {
            prev[m + j] = int(node);
            stack.push_back(m + j);
          }
      } else {
        size_t j = node - m;
        for (size_t i = 0; i < m; ++i)
          if (basic[i][j] && prev[i] < 0) {
            prev[i] = int(node);
            stack.push_back(i);
          }
      }
    }
    std::vector<size_t> path;
    for (size_t node = i0;; node = size_t(prev[node])) {
      path.push_back(node);
      if (node == m + j0) break;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void solve() {
    northwest_corner();
    const size_t max_iter = 20000 * (m + n);
    for (size_t iter = 0; iter < max_iter; ++iter) {
      compute_potentials();
      // Bland: first cell in row-major order with negative reduced cost.
      size_t ei = m, ej = n;
      for (size_t i = 0; i < m && ei == m; ++i)
        for (size_t j = 0; j < n; ++j)
          if (!basic[i][j] && cost[i][j] - u[i] - v[j] < -kPivotTol) {
            ei = i;
            ej = j;
            break;
          }
      if (ei == m) return;  // optimal

      std::vector<size_t> path = tree_path(ei, ej);
      // Cycle arcs along the path alternate -,+,-,... starting from col ej.
      struct Arc { size_t i, j; bool minus; };
      std::vector<Arc> arcs;
      for (size_t k = 0; k + 1 < path.size(); ++k) {
        size_t p = path[k], q = path[k + 1];
        size_t ai = p < m ? p : q;
        size_t aj = p < m ? q - m : p - m;
        arcs.push_back({ai, aj, k % 2 == 0});
      }
      double theta = std::numeric_limits<double>::infinity();
      for (const Arc& arc : arcs)
        if (arc.minus) theta = std::min(theta, x[arc.i][arc.j]);
      // Leaving arc: lexicographically smallest minus arc attaining theta.
      size_t li = m, lj = n;
      for (const Arc& arc : arcs)
        if (arc.minus && x[arc.i][arc.j] <= theta + 1e-15)
          if (li == m || arc.i < li || (arc.i == li && arc.j < lj)) {
            li = arc.i;
            lj = arc.j;
          }
      for (const Arc& arc : arcs)
        x[arc.i][arc.j] += arc.minus ? -theta : theta;
      x[ei][ej] += theta;
      basic[ei][ej] = 1;
      basic[li][lj] = 0;
      x[li][lj] = 0.0;
    }
    throw std::runtime_error("transportation simplex: iteration limit");
  }
};

}  // namespace

OtResult ot_solve(const Distribution& q_x, const Distribution& q_y,
                  const CostMatrix& c) {
  if (q_x.size() != c.rows() || q_y.size() != c.cols())
    throw dimension_error("ot: dimension mismatch");

  std::vector<size_t> rows, cols;
  for (size_t i = 0; i < q_x.size(); ++i)
    if (q_x[i] > 0.0) rows.push_back(i);
  for (size_t j = 0; j < q_y.size(); ++j)
    if (q_y[j] > 0.0) cols.push_back(j);

  std::vector<double> a, b;
  for (size_t i : rows) a.push_back(q_x[i]);
  for (size_t j : cols) b.push_back(q_y[j]);
  std::vector<std::vector<double>> sub(rows.size(), std::vector<double>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) sub[i][j] = c(rows[i], cols[j]);

  SimplexSolver solver(a, b, std::move(sub));
  solver.solve();

  std::vector<std::vector<double>> plan(q_x.size(), std::vector<double>(q_y.size(), 0.0));
  double value = 0.0;
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) {
      plan[rows[i]][cols[j]] = solver.x[i][j];
      value += solver.x[i][j] * c(rows[i], cols[j]);
    }

  // Potentials: shift so f = 0 on the first support atom, then extend to
  // zero-mass atoms with tight c-transforms.
  const double shift = solver.u[0];
  std::vector<double> f(q_x.size()), g(q_y.size());
  std::vector<char> have_f(q_x.size(), 0), have_g(q_y.size(), 0);
  for (size_t i = 0; i < rows.size(); ++i) {
    f[rows[i]] = solver.u[i] - shift;
    have_f[rows[i]] = 1;
  }
  for (size_t j = 0; j < cols.size(); ++j) {
    g[cols[j]] = solver.v[j] + shift;
    have_g[cols[j]] = 1;
  }
  for (size_t j = 0; j < q_y.size(); ++j)
    if (!have_g[j]) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t i : rows) best = std::min(best, c(i, j) - f[i]);
      g[j] = best;
    }
  for (size_t i = 0; i < q_x.size(); ++i)
    if (!have_f[i]) {
      double best = std::numeric_limits<double>::infinity();
      for (size_t j = 0; j < q_y.size(); ++j) best = std::min(best, c(i, j) - g[j]);
      f[i] = best;
    }

  return {value, Coupling{std::move(plan), q_x, q_y}, DualPotentials{std::move(f), std::move(g)}};
}

std::pair<double, Coupling> ot_cost(const Distribution& q_x, const Distribution& q_y,
                                    const CostMatrix& c) {
  OtResult r = ot_solve(q_x, q_y, c);
  return {r.value, std::move(r.coupling)};
}

std::pair<double, DualPotentials> ot_dual(const Distribution& q_x,
                                          const Distribution& q_y,
                                          const CostMatrix& c) {
  OtResult r = ot_solve(q_x, q_y, c);
  double dual = q_x.mean(r.potentials.f) + q_y.mean(r.potentials.g);
  return {dual, std::move(r.potentials)};
}

double ot_value(const Distribution& q_x, const Distribution& q_y,
                const CostMatrix& c) {
  if (q_x.size() != c.rows() || q_y.size() != c.cols())
    throw dimension_error("ot_value: dimension mismatch");
  if (c.is_hamming()) {
    double s = 0.0;
    for (size_t i = 0; i < q_x.size(); ++i) s += std::max(q_x[i] - q_y[i], 0.0);
    return s;
  }
  if (q_x.size() == 2 && q_y.size() == 2) {
    // One free plan entry; the cost is linear in it, so check both endpoints.
    double lo = std::max(0.0, q_x[0] + q_y[0] - 1.0);
    double hi = std::min(q_x[0], q_y[0]);
    auto eval = [&](double p00) {
      return c(0, 0) * p00 + c(0, 1) * (q_x[0] - p00) + c(1, 0) * (q_y[0] - p00) +
             c(1, 1) * (1.0 - q_x[0] - q_y[0] + p00);
    };
    return std::min(eval(lo), eval(hi));
  }
  return ot_solve(q_x, q_y, c).value;
}

double conditional_ot(const Kernel& q_x, const Kernel& q_y, const Distribution& w,
                      const CostMatrix& c) {
  if (w.size() > q_x.num_rows() || q_x.num_rows() != q_y.num_rows())
    throw dimension_error("conditional_ot: row count mismatch");
  double s = 0.0;
  for (size_t i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) s += w[i] * ot_value(q_x.row(i), q_y.row(i), c);
  return s;
}

}  // namespace iso
