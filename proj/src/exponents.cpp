#include "iso/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "iso/divergence.hpp"
#include "iso/transport.hpp"

namespace iso {

namespace {

void check_dims(const Distribution& p_x, const Distribution& p_y,
                const CostMatrix& c) {
  if (p_x.size() != c.rows() || p_y.size() != c.cols())
    throw dimension_error("exponents: cost dimensions do not match marginals");
}

std::vector<double> cost_column(const CostMatrix& c, size_t j) {
  std::vector<double> f(c.rows());
  for (size_t i = 0; i < c.rows(); ++i) f[i] = c(i, j);
  return f;
}

template <class F>
double golden_min_arg(F&& h, double lo, double hi, int iters = 160) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = h(x1), f2 = h(x2);
  for (int it = 0; it < iters && b - a > 1e-14; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = h(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = h(x2);
    }
  }
  return 0.5 * (a + b);
}

bool nearly_uniform(const Distribution& p) {
  double u = 1.0 / double(p.size());
  for (size_t i = 0; i < p.size(); ++i)
    if (std::fabs(p[i] - u) > 1e-12) return false;
  return true;
}

// ---- Hamming-cost exact paths -------------------------------------------
//
// For Hamming cost, C(Q_X, Q_Y) = TV(Q_X, Q_Y) = max_A Q_Y(A) - Q_X(A), so
// the constraint C >= tau splits into one half-space problem per subset A:
// push Q_X(A) as low as the divergence ball allows, then I-project P_Y onto
// {Q_Y(A) >= s_A + tau}. The minimum over subsets is exact.

ExponentResult hamming_phi_geq_exact(double alpha, double tau,
                                     const Distribution& p_x,
                                     const Distribution& p_y) {
  size_t m = p_x.size();
  ExponentResult best{ExtReal::pos_inf(), "empty-feasible", std::nullopt,
                      std::nullopt, false};
  bool dom_seen = false;
  for (std::uint32_t mask = 1; mask < (1u << m) - 1u; ++mask) {
    std::vector<double> ind_a(m, 0.0), ind_ac(m, 0.0);
    for (size_t i = 0; i < m; ++i)
      ((mask >> i) & 1u) ? ind_a[i] = 1.0 : ind_ac[i] = 1.0;
    double s;
    std::optional<Distribution> qx_wit;
    if (alpha <= 0.0) {
      s = p_x.mean(ind_a);
      qx_wit = p_x;
    } else {
      auto low = kl_ball_max_mean_arg(p_x, ind_ac, alpha);
      s = std::max(1.0 - low.value, 0.0);
      qx_wit = low.maximizer;
    }
    double thresh = s + tau;
    if (thresh > 1.0 + 1e-12) continue;
    auto r = iproj_halfspace(p_y, ind_a, std::min(thresh, 1.0));
    if (!r.minimizer) {
      dom_seen = true;
      continue;
    }
    if (r.value < best.value) {
      best.value = r.value;
      best.method = "subset-exact";
      best.witness_x = qx_wit;
      best.witness_y = r.minimizer;
    }
  }
  if (!best.value.is_finite()) best.method = dom_seen ? "dom" : "empty-feasible";
  return best;
}

// Uniform marginals are permutation-invariant, so only the subset size
// matters; exact for any alphabet size.
ExponentResult hamming_varphi_uniform(double tau, const Distribution& p_x,
                                      const Distribution& p_y) {
  size_t m = p_x.size();
  ExponentResult best{ExtReal::pos_inf(), "empty-feasible", p_x, std::nullopt,
                      false};
  bool dom_seen = false;
  for (size_t k = 1; k < m; ++k) {
    std::vector<double> ind(m, 0.0);
    for (size_t i = 0; i < k; ++i) ind[i] = 1.0;
    double thresh = double(k) / double(m) + tau;
    if (thresh > 1.0 + 1e-12) continue;
    auto r = iproj_halfspace(p_y, ind, std::min(thresh, 1.0));
    if (!r.minimizer) {
      dom_seen = true;
      continue;
    }
    if (r.value < best.value) {
      best.value = r.value;
      best.method = "kset-exact";
      best.witness_y = r.minimizer;
    }
  }
  if (!best.value.is_finite()) best.method = dom_seen ? "dom" : "empty-feasible";
  return best;
}

// ---- general inner problem: min D(Q_Y||P_Y) s.t. C(q_x, Q_Y) >= tau ------
//
// Convex-concave iteration: Kantorovich potentials (f,g) at the current
// iterate satisfy C(q_x, Q) >= q_x(f) + Q(g) for every Q, so each I-projection
// onto the linearized half-space stays feasible and the divergence descends.

struct InnerOut {
  ExtReal value = ExtReal::pos_inf();
  std::optional<Distribution> q_y;
};

InnerOut inner_ccp_run(const Distribution& q_x, const Distribution& p_y,
                       const CostMatrix& c, double tau, const Distribution& start,
                       const SearchConfig& cfg) {
  Distribution q = start;
  ExtReal cur = ExtReal::pos_inf();
  bool have = false;
  for (int it = 0; it < cfg.ccp_iters; ++it) {
    auto [v, pot] = ot_dual(q_x, q, c);
    double thresh = tau - q_x.mean(pot.f);
    auto r = iproj_halfspace(p_y, pot.g, thresh);
    if (!r.minimizer) break;
    bool done = have && std::fabs(cur.as_double() - r.value.as_double()) < cfg.tol;
    q = *r.minimizer;
    cur = r.value;
    have = true;
    if (done) break;
  }
  if (!have) return {};
  if (ot_value(q_x, q, c) < tau - 1e-8) return {};
  return {cur, q};
}

InnerOut inner_varphi(const Distribution& q_x, const Distribution& p_y,
                      const CostMatrix& c, double tau, const SearchConfig& cfg,
                      bool allow_grid) {
  if (tau <= 1e-15) return {ExtReal(0.0), p_y};
  size_t cols = c.cols();
  // Feasibility: C(q_x, .) is convex, maximized at a point mass.
  double cmax = 0.0;
  size_t jbest = 0;
  for (size_t j = 0; j < cols; ++j) {
    double v = q_x.mean(cost_column(c, j));
    if (v > cmax) cmax = v, jbest = j;
  }
  if (tau > cmax + 1e-12) return {};
  InnerOut best;
  auto consider = [&](const InnerOut& cand) {
    if (cand.q_y && cand.value < best.value) best = cand;
  };
  // Guaranteed-feasible vertex candidates (value may be +inf when off supp).
  for (size_t j = 0; j < cols; ++j) {
    if (q_x.mean(cost_column(c, j)) < tau - 1e-12) continue;
    Distribution d = Distribution::point_mass(j, cols);
    consider({kl(d, p_y), d});
  }
  // Iteration starts: barycenter and near-corner mixtures.
  std::vector<Distribution> starts{p_y};
  for (size_t j = 0; j < cols; ++j) {
    std::vector<double> v(p_y.mass());
    for (double& x : v) x *= 0.05;
    v[j] += 0.95;
    starts.emplace_back(p_y.labels(), v);
  }
  (void)jbest;
  for (const auto& s : starts) consider(inner_ccp_run(q_x, p_y, c, tau, s, cfg));
  if (allow_grid && cols <= 3) {
    double delta = std::min(cfg.grid_step, 1.0 / 64);
    std::optional<Distribution> grid_best;
    ExtReal grid_val = ExtReal::pos_inf();
    for (const auto& q : simplex_grid(cols, delta)) {
      if (ot_value(q_x, q, c) < tau - 1e-12) continue;
      ExtReal v = kl(q, p_y);
      if (v < grid_val) grid_val = v, grid_best = q;
    }
    if (grid_best) {
      consider({grid_val, grid_best});
      consider(inner_ccp_run(q_x, p_y, c, tau, *grid_best, cfg));
    }
  }
  return best;
}

// ---- binary/Hamming closed path for phi_lambda ---------------------------

ExponentResult phi_lambda_binary_hamming(double tau, double lambda,
                                         const Distribution& p_x,
                                         const Distribution& p_y) {
  double ax = p_x[1], ay = p_y[1];
  if (std::fabs(ax - ay) >= tau - 1e-15)
    return {ExtReal(0.0), "exact", p_x, p_y, false};
  auto obj = [&](double qx, double qy) {
    return (binary_kl(qx, ax).scaled(lambda) + binary_kl(qy, ay).scaled(1.0 - lambda))
        .as_double();
  };
  ExponentResult best{ExtReal::pos_inf(), "dom", std::nullopt, std::nullopt, false};
  auto take = [&](double qx, double qy) {
    double v = obj(qx, qy);
    if (v < best.value.as_double()) {
      best.value = ExtReal(v);
      best.method = "exact-binary";
      best.witness_x = Distribution::bernoulli(qx);
      best.witness_y = Distribution::bernoulli(qy);
    }
  };
  // The objective is convex and its unconstrained minimum is infeasible, so
  // the optimum sits on |qx - qy| = tau; one convex 1D problem per branch.
  if (tau <= 1.0 + 1e-15) {
    double t = std::min(tau, 1.0);
    double q1 = golden_min_arg([&](double qx) { return obj(qx, qx + t); }, 0.0,
                               1.0 - t);
    take(q1, q1 + t);
    double q2 = golden_min_arg([&](double qx) { return obj(qx, qx - t); }, t, 1.0);
    take(q2, q2 - t);
    take(0.0, t);
    take(1.0 - t, 1.0);
    take(t, 0.0);
    take(1.0, 1.0 - t);
  }
  if (!best.value.is_finite()) best.method = tau > 1.0 + 1e-12 ? "empty-feasible" : "dom";
  return best;
}

// ---- binary/Hamming exact inner problem for psi --------------------------

double logit_safe(double q) {
  q = std::clamp(q, 1e-12, 1.0 - 1e-12);
  return std::log(q / (1.0 - q));
}
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct PsiInnerBinary {
  double value;  // sum_w w_w * kl2(y_w, p_y)
  double y0, y1;
};

// min w0 kl2(y0,ay) + w1 kl2(y1,ay)  s.t.  w0|x0-y0| + w1|x1-y1| <= tau.
// KKT: each y_w moves from ay toward x_w until logit(y)-logit(ay) = +/-lam;
// bisect the shared multiplier on the cost constraint.
PsiInnerBinary psi_inner_binary(double w0, double w1, double x0, double x1,
                                double ay, double tau) {
  auto pull = [&](double xw, double lam) {
    if (xw > ay) return std::min(sigmoid(logit_safe(ay) + lam), xw);
    if (xw < ay) return std::max(sigmoid(logit_safe(ay) - lam), xw);
    return xw;
  };
  auto cost = [&](double lam) {
    return w0 * std::fabs(x0 - pull(x0, lam)) + w1 * std::fabs(x1 - pull(x1, lam));
  };
  if (cost(0.0) <= tau + 1e-15) return {0.0, ay, ay};
  double lo = 0.0, hi = 1.0;
  while (cost(hi) > tau && hi < 80.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (cost(mid) > tau ? lo : hi) = mid;
  }
  double y0 = pull(x0, hi), y1 = pull(x1, hi);
  double v = (binary_kl(y0, ay).scaled(w0) + binary_kl(y1, ay).scaled(w1)).as_double();
  return {v, y0, y1};
}

// ---- general inner bound for psi ----------------------------------------
//
// Parametrize the inner problem by per-w channels K_w; exponentiated-gradient
// descent on a Lagrangian, then a certified lower bound via the closed-form
// potential relaxation S_w(lam) >= lam q_w(f) - log P_Y(e^{-lam g}).

struct PsiGeneralInner {
  double upper;       // feasible-solution value (upper bound on the inner min)
  double lower;       // certified lower bound on the inner min
  std::vector<Distribution> y_rows;
};

std::pair<Distribution, double> eg_channel_solve(const Distribution& q,
                                                 const Distribution& p_y,
                                                 const CostMatrix& c, double lam) {
  size_t nx = q.size(), ny = p_y.size();
  std::vector<std::vector<double>> k(nx, std::vector<double>(ny));
  for (size_t i = 0; i < nx; ++i)
    for (size_t j = 0; j < ny; ++j)
      k[i][j] = p_y[j] > 0 ? p_y[j] : 0.0;
  for (size_t i = 0; i < nx; ++i) {
    double s = 0.0;
    for (double v : k[i]) s += v;
    for (double& v : k[i]) v /= s;
  }
  for (int it = 0; it < 400; ++it) {
    std::vector<double> m(ny, 0.0);
    for (size_t i = 0; i < nx; ++i)
      for (size_t j = 0; j < ny; ++j) m[j] += q[i] * k[i][j];
    for (size_t i = 0; i < nx; ++i) {
      double s = 0.0;
      for (size_t j = 0; j < ny; ++j) {
        double grad = (p_y[j] > 0 ? std::log(std::max(m[j], 1e-300) / p_y[j])
                                  : 1e3) +
                      lam * c(i, j);
        k[i][j] *= std::exp(-0.3 * grad);
        s += k[i][j];
      }
      for (size_t j = 0; j < ny; ++j) k[i][j] /= s;
    }
  }
  std::vector<double> m(ny, 0.0);
  double cost = 0.0;
  for (size_t i = 0; i < nx; ++i)
    for (size_t j = 0; j < ny; ++j) {
      m[j] += q[i] * k[i][j];
      cost += q[i] * k[i][j] * c(i, j);
    }
  double s = 0.0;
  for (double v : m) s += v;
  for (double& v : m) v /= s;
  return {Distribution(p_y.labels(), m), cost};
}

PsiGeneralInner psi_inner_general(const std::vector<double>& w,
                                  const std::vector<Distribution>& q,
                                  const Distribution& p_y, const CostMatrix& c,
                                  double tau) {
  size_t nw = w.size();
  auto eval = [&](double lam) {
    double tot_cost = 0.0, tot_kl = 0.0;
    std::vector<Distribution> rows;
    for (size_t t = 0; t < nw; ++t) {
      if (w[t] <= 0) {
        rows.push_back(p_y);
        continue;
      }
      auto [m, cost] = eg_channel_solve(q[t], p_y, c, lam);
      tot_cost += w[t] * cost;
      tot_kl += w[t] * kl(m, p_y).as_double();
      rows.push_back(m);
    }
    return std::tuple<double, double, std::vector<Distribution>>(tot_cost, tot_kl,
                                                                 rows);
  };
  auto [c0, k0, r0] = eval(0.0);
  if (c0 <= tau + 1e-12) return {0.0, 0.0, r0};
  double lo = 0.0, hi = 1.0;
  while (hi < 1e6) {
    auto [ch, kh, rh] = eval(hi);
    if (ch <= tau) break;
    hi *= 4.0;
  }
  for (int it = 0; it < 30; ++it) {
    double mid = 0.5 * (lo + hi);
    auto [cm, km, rm] = eval(mid);
    (cm > tau ? lo : hi) = mid;
  }
  auto [cf, kf, rf] = eval(hi);
  // Certified lower bound at lam = hi from the potential relaxation.
  double lam = hi;
  double lower = -lam * tau;
  for (size_t t = 0; t < nw; ++t) {
    if (w[t] <= 0) continue;
    auto [v, pot] = ot_dual(q[t], rf[t], c);
    std::vector<double> ng(pot.g.size());
    for (size_t j = 0; j < ng.size(); ++j) ng[j] = -lam * pot.g[j];
    double sw = lam * q[t].mean(pot.f) - log_sum_exp(ng, p_y.mass());
    lower += w[t] * sw;
  }
  return {kf, std::max(lower, 0.0), rf};
}

}  // namespace

std::vector<Distribution> simplex_grid(size_t m, double delta) {
  int n = std::max<int>(1, int(std::llround(1.0 / delta)));
  std::vector<Distribution> out;
  std::vector<double> cur(m, 0.0);
  std::function<void(size_t, int)> rec = [&](size_t i, int left) {
    if (i + 1 == m) {
      cur[i] = double(left) / double(n);
      out.emplace_back(cur);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      cur[i] = double(k) / double(n);
      rec(i + 1, left - k);
    }
  };
  rec(0, n);
  return out;
}

ExponentResult varphi(double tau, const Distribution& p_x, const Distribution& p_y,
                      const CostMatrix& c, const SearchConfig& cfg) {
  check_dims(p_x, p_y, c);
  if (tau <= 1e-15) return {ExtReal(0.0), "exact", p_x, p_y, false};
  if (c.is_hamming()) {
    if (p_x.size() <= 16) {
      auto r = hamming_phi_geq_exact(0.0, tau, p_x, p_y);
      r.witness_x = p_x;
      return r;
    }
    if (nearly_uniform(p_x) && nearly_uniform(p_y))
      return hamming_varphi_uniform(tau, p_x, p_y);
  }
  auto inner = inner_varphi(p_x, p_y, c, tau, cfg, true);
  ExponentResult out;
  out.witness_x = p_x;
  out.coarse_warning = c.cols() > 3;
  if (!inner.q_y) {
    out.value = ExtReal::pos_inf();
    out.method = "empty-feasible";
    return out;
  }
  out.value = inner.value;
  out.method = c.cols() <= 3 ? "grid+ccp" : "ccp";
  out.witness_y = inner.q_y;
  if (!out.value.is_finite()) out.method = "dom";
  return out;
}

ExponentResult varphi_x(double tau, const Distribution& p_x, const CostMatrix& c,
                        const SearchConfig& cfg) {
  if (c.rows() != c.cols()) throw dimension_error("varphi_x: cost must be square");
  return varphi(tau, p_x, p_x, c, cfg);
}

ExponentResult phi_geq(double alpha, double tau, const Distribution& p_x,
                       const Distribution& p_y, const CostMatrix& c,
                       const SearchConfig& cfg) {
  check_dims(p_x, p_y, c);
  if (tau <= 1e-15) return {ExtReal(0.0), "exact", p_x, p_y, false};
  if (alpha <= 0.0) return varphi(tau, p_x, p_y, c, cfg);
  if (c.is_hamming() && p_x.size() <= 16)
    return hamming_phi_geq_exact(alpha, tau, p_x, p_y);

  // Feasibility over the alpha-ball: sup C attained at a point-mass Q_Y and a
  // ball-extreme Q_X per column.
  double cmax_ball = 0.0;
  for (size_t j = 0; j < c.cols(); ++j)
    cmax_ball = std::max(cmax_ball,
                         kl_ball_max_mean(p_x, cost_column(c, j), alpha));
  if (tau > cmax_ball + 1e-12)
    return {ExtReal::pos_inf(), "empty-feasible", std::nullopt, std::nullopt,
            false};

  struct Cand {
    ExtReal value;
    Distribution q_x;
    Distribution q_y;
  };
  std::vector<Cand> cands;
  auto outer_eval = [&](const Distribution& q_x, bool grid_inner) {
    auto inner = inner_varphi(q_x, p_y, c, tau, cfg, grid_inner);
    if (inner.q_y) cands.push_back({inner.value, q_x, *inner.q_y});
  };
  outer_eval(p_x, true);
  for (size_t j = 0; j < c.cols(); ++j)
    outer_eval(kl_ball_max_mean_arg(p_x, cost_column(c, j), alpha).maximizer,
               true);
  if (p_x.size() <= 3) {
    double delta = std::max(cfg.grid_step, 1.0 / 32);
    for (const auto& q : simplex_grid(p_x.size(), delta)) {
      if (kl(q, p_x).as_double() > alpha + 1e-12) continue;
      outer_eval(q, false);
    }
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.value < b.value; });
  ExponentResult out;
  out.coarse_warning = p_x.size() > 3 || c.cols() > 3;
  if (cands.empty()) {
    out.value = ExtReal::pos_inf();
    out.method = "dom";
    return out;
  }
  // Alternate refinement on the best few: raise C over the ball via the
  // x-potential, then re-descend the inner problem.
  Cand best = cands.front();
  for (size_t k = 0; k < std::min<size_t>(cands.size(), 3); ++k) {
    Cand cur = cands[k];
    for (int it = 0; it < 30; ++it) {
      auto [v, pot] = ot_dual(cur.q_x, cur.q_y, c);
      Distribution qx2 = kl_ball_max_mean_arg(p_x, pot.f, alpha).maximizer;
      auto inner = inner_ccp_run(qx2, p_y, c, tau, cur.q_y, cfg);
      if (!inner.q_y) break;
      if (inner.value.as_double() > cur.value.as_double() - cfg.tol) {
        cur = {inner.value, qx2, *inner.q_y};
        break;
      }
      cur = {inner.value, qx2, *inner.q_y};
    }
    if (cur.value < best.value) best = cur;
  }
  out.value = best.value;
  out.method = p_x.size() <= 3 && c.cols() <= 3 ? "grid+ccp" : "ccp";
  out.witness_x = best.q_x;
  out.witness_y = best.q_y;
  if (!out.value.is_finite()) out.method = "dom";
  return out;
}

ExtReal kappa_x(double alpha, const Distribution& p_x, const CostMatrix& c,
                const SearchConfig& cfg) {
  if (c.rows() != c.cols() || p_x.size() != c.rows())
    throw dimension_error("kappa_x: cost must be square on the alphabet");
  if (alpha <= 0.0) return ExtReal::neg_inf();  // empty strict ball
  size_t m = p_x.size();
  if (c.is_hamming() && m <= 16) {
    // sup over the ball of TV = max over subsets of the ball-max mass excess.
    double best = 0.0;
    for (std::uint32_t mask = 1; mask < (1u << m) - 1u; ++mask) {
      std::vector<double> ind(m, 0.0);
      double pa = 0.0;
      for (size_t i = 0; i < m; ++i)
        if ((mask >> i) & 1u) ind[i] = 1.0, pa += p_x[i];
      best = std::max(best, kl_ball_max_mean(p_x, ind, alpha) - pa);
    }
    return ExtReal(best);
  }
  // Frank-Wolfe ascent: the y-potential linearizes C from below and is tight
  // at the iterate, so each ball maximization cannot decrease C.
  double best = 0.0;
  for (size_t j = 0; j < m; ++j) {
    Distribution q = kl_ball_max_mean_arg(p_x, cost_column(c, j), alpha).maximizer;
    double cur = ot_value(p_x, q, c);
    for (int it = 0; it < cfg.ccp_iters; ++it) {
      auto [v, pot] = ot_dual(p_x, q, c);
      Distribution qn = kl_ball_max_mean_arg(p_x, pot.g, alpha).maximizer;
      double vn = ot_value(p_x, qn, c);
      if (vn < cur + cfg.tol) break;
      q = qn;
      cur = vn;
    }
    best = std::max(best, cur);
  }
  return ExtReal(best);
}

ExponentResult phi_lambda_geq(double tau, double lambda, const Distribution& p_x,
                              const Distribution& p_y, const CostMatrix& c,
                              const SearchConfig& cfg) {
  check_dims(p_x, p_y, c);
  if (lambda < 0.0) throw std::invalid_argument("phi_lambda_geq: lambda < 0");
  if (tau <= 1e-15) return {ExtReal(0.0), "exact", p_x, p_y, false};
  if (tau > c.max_entry() + 1e-12)
    return {ExtReal::pos_inf(), "empty-feasible", std::nullopt, std::nullopt,
            false};
  if (c.is_hamming() && p_x.size() == 2)
    return phi_lambda_binary_hamming(tau, lambda, p_x, p_y);

  struct Cand {
    double value;
    Distribution q_x, q_y;
  };
  std::vector<Cand> cands;
  auto obj = [&](const Distribution& qx, const Distribution& qy) {
    return (kl(qx, p_x).scaled(lambda) + kl(qy, p_y).scaled(1.0 - lambda))
        .as_double();
  };
  auto take = [&](const Distribution& qx, const Distribution& qy) {
    if (ot_value(qx, qy, c) < tau - 1e-10) return;
    cands.push_back({obj(qx, qy), qx, qy});
  };
  for (size_t i = 0; i < c.rows(); ++i)
    for (size_t j = 0; j < c.cols(); ++j)
      if (c(i, j) >= tau - 1e-12)
        take(Distribution::point_mass(i, c.rows()),
             Distribution::point_mass(j, c.cols()));
  if (c.rows() <= 3 && c.cols() <= 3) {
    double delta = (c.rows() == 2 && c.cols() == 2) ? std::min(cfg.grid_step, 1.0 / 64)
                                                    : std::max(cfg.grid_step, 1.0 / 16);
    auto gx = simplex_grid(c.rows(), delta);
    auto gy = simplex_grid(c.cols(), delta);
    for (const auto& qx : gx)
      for (const auto& qy : gy) take(qx, qy);
  }
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.value < b.value; });
  ExponentResult out;
  out.coarse_warning = c.rows() > 3 || c.cols() > 3;
  if (cands.empty()) {
    out.value = ExtReal::pos_inf();
    out.method = "dom";
    return out;
  }
  Cand best = cands.front();
  for (size_t k = 0; k < std::min<size_t>(cands.size(), 4); ++k) {
    Cand cur = cands[k];
    for (int it = 0; it < cfg.ccp_iters; ++it) {
      auto [v1, pot1] = ot_dual(cur.q_x, cur.q_y, c);
      auto ry = iproj_halfspace(p_y, pot1.g, tau - cur.q_x.mean(pot1.f));
      if (ry.minimizer) cur.q_y = *ry.minimizer;
      auto [v2, pot2] = ot_dual(cur.q_x, cur.q_y, c);
      auto rx = iproj_halfspace(p_x, pot2.f, tau - cur.q_y.mean(pot2.g));
      if (rx.minimizer) cur.q_x = *rx.minimizer;
      double nv = obj(cur.q_x, cur.q_y);
      if (nv > cur.value - cfg.tol) {
        cur.value = std::min(nv, cur.value);
        break;
      }
      cur.value = nv;
    }
    if (ot_value(cur.q_x, cur.q_y, c) >= tau - 1e-8 && cur.value < best.value)
      best = cur;
  }
  out.value = ExtReal(best.value);
  out.method = c.rows() <= 3 && c.cols() <= 3 ? "grid+ccp" : "ccp";
  out.witness_x = best.q_x;
  out.witness_y = best.q_y;
  return out;
}

PsiResult psi(double alpha, double tau, const Distribution& p_x,
              const Distribution& p_y, const CostMatrix& c,
              const SearchConfig& cfg) {
  check_dims(p_x, p_y, c);
  if (tau >= c.max_entry() - 1e-15) {
    // Any conditional coupling costs at most c_max, so the inner minimum is 0
    // for every admissible mixture and the supremum is exactly 0.
    Kernel kx({p_x, p_x}), ky({p_y, p_y});
    return {ExtReal(0.0), "exact", Distribution({0.5, 0.5}), kx, ky};
  }
  bool binary_hamming = c.is_hamming() && p_x.size() == 2 && p_y.size() == 2;
  if (binary_hamming) {
    double ax = p_x[1], ay = p_y[1];
    double best = -1.0;
    double bb = 0.5, bx0 = ax, bx1 = ax, by0 = ay, by1 = ay;
    auto eval = [&](double beta, double x0, double x1) {
      double d = (binary_kl(x0, ax).scaled(1.0 - beta) +
                  binary_kl(x1, ax).scaled(beta))
                     .as_double();
      if (d > alpha + 1e-12) return;
      auto in = psi_inner_binary(1.0 - beta, beta, x0, x1, ay, tau);
      if (in.value > best) {
        best = in.value;
        bb = beta;
        bx0 = x0;
        bx1 = x1;
        by0 = in.y0;
        by1 = in.y1;
      }
    };
    for (int b = 0; b <= 16; ++b) {
      double beta = b / 16.0;
      for (int i = 0; i <= 64; ++i)
        for (int j = 0; j <= 64; ++j) eval(beta, i / 64.0, j / 64.0);
    }
    // Pattern-search polish around the best grid point.
    double step = 1.0 / 64;
    for (int round = 0; round < 40; ++round) {
      double b0 = bb, x0 = bx0, x1 = bx1, prev = best;
      for (int db = -1; db <= 1; ++db)
        for (int d0 = -1; d0 <= 1; ++d0)
          for (int d1 = -1; d1 <= 1; ++d1)
            eval(std::clamp(b0 + db * step, 0.0, 1.0),
                 std::clamp(x0 + d0 * step, 0.0, 1.0),
                 std::clamp(x1 + d1 * step, 0.0, 1.0));
      if (best <= prev + cfg.tol) step *= 0.5;
      if (step < 1e-10) break;
    }
    Kernel kx({Distribution::bernoulli(bx0), Distribution::bernoulli(bx1)});
    Kernel ky({Distribution::bernoulli(by0), Distribution::bernoulli(by1)});
    return {ExtReal(std::max(best, 0.0)), "exact-inner-grid-outer",
            Distribution({1.0 - bb, bb}), kx, ky};
  }
  // General alphabets: coarse outer grid, certified inner lower bound.
  double best = 0.0;
  std::optional<Distribution> bw;
  std::optional<Kernel> bkx, bky;
  auto rows = p_x.size() <= 3 ? simplex_grid(p_x.size(), 1.0 / 8)
                              : std::vector<Distribution>{p_x};
  if (p_x.size() > 3)
    for (size_t i = 0; i < p_x.size(); ++i)
      rows.push_back(Distribution::point_mass(i, p_x.size()));
  for (int b = 0; b <= 8; ++b) {
    double beta = b / 8.0;
    for (const auto& r0 : rows)
      for (const auto& r1 : rows) {
        double d = (kl(r0, p_x).scaled(1.0 - beta) + kl(r1, p_x).scaled(beta))
                       .as_double();
        if (d > alpha + 1e-12) continue;
        auto in = psi_inner_general({1.0 - beta, beta}, {r0, r1}, p_y, c, tau);
        if (in.lower > best) {
          best = in.lower;
          bw = Distribution({1.0 - beta, beta});
          bkx = Kernel({r0, r1});
          bky = Kernel(in.y_rows);
        }
      }
  }
  if (!bw) {
    bw = Distribution({0.5, 0.5});
    bkx = Kernel({p_x, p_x});
    bky = Kernel({p_y, p_y});
  }
  return {ExtReal(best), "grid-lower", bw, bkx, bky};
}

ExtReal gl_bound(double alpha, double tau, double pexp,
                 const PiecewiseLinear& phi_x_env,
                 const PiecewiseLinear& kappa_upper_env) {
  if (pexp < 1.0) throw std::invalid_argument("gl_bound: p-exponent must be >= 1");
  tau = std::max(tau, 0.0);
  double kap = 0.0;
  if (!kappa_upper_env.xs.empty() && alpha >= kappa_upper_env.min_x() - 1e-12) {
    ExtReal k = kappa_upper_env(std::min(alpha, kappa_upper_env.max_x()));
    if (k.is_finite()) kap = std::max(k.value(), 0.0);
  }
  double base = std::pow(tau, 1.0 / pexp) - std::pow(kap, 1.0 / pexp);
  base = std::max(base, 0.0);
  return phi_x_env(std::pow(base, pexp));
}

double gaussian_bound(double alpha, double tau, double gamma, double pexp) {
  if (gamma <= 0.0) throw std::invalid_argument("gaussian_bound: gamma <= 0");
  double base = std::pow(std::max(tau, 0.0), 1.0 / pexp) / std::sqrt(gamma) -
                std::sqrt(std::max(alpha, 0.0));
  base = std::max(base, 0.0);
  return base * base;
}

ExtReal hamming_L(double tau) {
  if (tau < -1e-15 || tau > 1.0 + 1e-15)
    throw std::domain_error("hamming_L: tau outside [0,1]");
  tau = std::clamp(tau, 0.0, 1.0);
  if (tau == 0.0) return ExtReal(0.0);
  if (tau >= 1.0) return ExtReal::pos_inf();
  auto h = [&](double p) { return binary_kl(p, std::min(p + tau, 1.0)).as_double(); };
  // Coarse bracket then golden-section refinement.
  double hi = 1.0 - tau;
  double bp = 0.0, bv = h(0.0);
  int steps = 1000;
  for (int i = 1; i <= steps; ++i) {
    double p = hi * double(i) / steps;
    double v = h(p);
    if (v < bv) bv = v, bp = p;
  }
  double lo_b = std::max(0.0, bp - hi / steps), hi_b = std::min(hi, bp + hi / steps);
  double p = golden_min_arg(h, lo_b, hi_b);
  return ExtReal(std::min(h(p), bv));
}

double hamming_L_inverse(double alpha) {
  if (alpha <= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (hamming_L(mid).as_double() >= alpha ? hi : lo) = mid;
  }
  return hi;
}

ExtReal hamming_phi_lb(double alpha, double tau) {
  if (tau < -1e-15 || tau > 1.0 + 1e-15)
    throw std::domain_error("hamming_phi_lb: tau outside [0,1]");
  double arg = std::max(tau - hamming_L_inverse(alpha), 0.0);
  return hamming_L(std::min(arg, 1.0));
}

}  // namespace iso
