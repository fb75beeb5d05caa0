#include "iso/duals.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "iso/divergence.hpp"
#include "iso/transport.hpp"

namespace iso {

namespace {

constexpr double kGolden = 0.6180339887498949;

double lse(const Distribution& p, const std::vector<double>& f, double lambda) {
  std::vector<double> a(f.size());
  for (size_t i = 0; i < f.size(); ++i) a[i] = lambda * f[i];
  return log_sum_exp(a, p.mass());
}

std::vector<double> c_transform(const CostMatrix& c, const std::vector<double>& f) {
  std::vector<double> g(c.cols());
  for (size_t j = 0; j < c.cols(); ++j) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < c.rows(); ++i) m = std::min(m, c(i, j) - f[i]);
    g[j] = m;
  }
  return g;
}

// Maximize a unimodal h on [a,b]; ties shrink toward the left endpoint.
std::pair<double, double> golden_max(const std::function<double(double)>& h,
                                     double a, double b, int iters = 140) {
  double x1 = b - kGolden * (b - a), x2 = a + kGolden * (b - a);
  double h1 = h(x1), h2 = h(x2);
  for (int it = 0; it < iters; ++it) {
    if (h1 >= h2) {
      b = x2; x2 = x1; h2 = h1;
      x1 = b - kGolden * (b - a); h1 = h(x1);
    } else {
      a = x1; x1 = x2; h1 = h2;
      x2 = a + kGolden * (b - a); h2 = h(x2);
    }
  }
  double x = 0.5 * (a + b);
  return {x, h(x)};
}

// Convex 1D minimization on [a,b].
std::pair<double, double> golden_min(const std::function<double(double)>& h,
                                     double a, double b, int iters = 140) {
  auto neg = [&](double x) { return -h(x); };
  auto [x, v] = golden_max(neg, a, b, iters);
  return {x, -v};
}

// All labeled trees on n >= 2 vertices as edge lists (decoded sequences).
std::vector<std::vector<std::pair<size_t, size_t>>> all_trees(size_t n) {
  std::vector<std::vector<std::pair<size_t, size_t>>> trees;
  size_t len = n - 2;
  std::vector<size_t> seq(len, 0);
  while (true) {
    std::vector<size_t> deg(n, 1);
    for (size_t s : seq) ++deg[s];
    std::vector<std::pair<size_t, size_t>> edges;
    std::vector<size_t> d = deg;
    for (size_t k = 0; k < len; ++k) {
      size_t leaf = 0;
      while (d[leaf] != 1) ++leaf;
      edges.emplace_back(leaf, seq[k]);
      d[leaf] = 0;
      --d[seq[k]];
    }
    size_t u = n, v = n;
    for (size_t i = 0; i < n; ++i)
      if (d[i] == 1) (u == n ? u : v) = i;
    edges.emplace_back(u, v);
    trees.push_back(std::move(edges));
    // next sequence
    size_t pos = 0;
    while (pos < len && seq[pos] + 1 == n) seq[pos++] = 0;
    if (pos == len) break;
    ++seq[pos];
  }
  return trees;
}

// Solve f along a tree with signed edge differences, f_root = 0.
bool solve_tree(const std::vector<std::pair<size_t, size_t>>& edges,
                unsigned sign_mask, const CostMatrix& d, size_t n,
                std::vector<double>& f) {
  f.assign(n, 0.0);
  std::vector<char> known(n, 0);
  known[0] = 1;
  size_t fixed = 1;
  while (fixed < n) {
    bool progress = false;
    for (size_t e = 0; e < edges.size(); ++e) {
      auto [u, v] = edges[e];
      double s = (sign_mask >> e) & 1u ? 1.0 : -1.0;  // f_u - f_v = s * d_uv
      if (known[u] && !known[v]) {
        f[v] = f[u] - s * d(u, v);
        known[v] = 1; ++fixed; progress = true;
      } else if (known[v] && !known[u]) {
        f[u] = f[v] + s * d(u, v);
        known[u] = 1; ++fixed; progress = true;
      }
    }
    if (!progress) return false;
  }
  return true;
}

bool lipschitz_feasible(const std::vector<double>& f, const CostMatrix& d,
                        double slack) {
  for (size_t i = 0; i < f.size(); ++i)
    for (size_t j = 0; j < f.size(); ++j)
      if (f[i] - f[j] > d(i, j) + slack) return false;
  return true;
}

void recenter(std::vector<double>& f, const Distribution& p) {
  double m = p.mean(f);
  for (double& x : f) x -= m;
}

// Largest 1-Lipschitz minorant, then recenter.
std::vector<double> lipschitz_project(const std::vector<double>& f,
                                      const CostMatrix& d, const Distribution& p) {
  std::vector<double> g(f.size());
  for (size_t i = 0; i < f.size(); ++i) {
    double m = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < f.size(); ++j) m = std::min(m, f[j] + d(i, j));
    g[i] = m;
  }
  recenter(g, p);
  return g;
}

}  // namespace

MetricSpace::MetricSpace(CostMatrix dist, Distribution base)
    : d_(std::move(dist)), p_(std::move(base)) {
  if (d_.rows() != d_.cols() || d_.rows() != p_.size())
    throw dimension_error("MetricSpace: distance/base size mismatch");
  if (!d_.is_metric())
    throw std::invalid_argument("MetricSpace: distance table is not a metric");
}

const std::vector<std::vector<double>>& MetricSpace::lipschitz_vertices() const {
  if (built_) return verts_;
  size_t n = p_.size();
  std::set<std::vector<long long>> seen;
  auto push = [&](std::vector<double> f) {
    std::vector<long long> key(n);
    for (size_t i = 0; i < n; ++i) key[i] = llround(f[i] * 1e9);
    if (seen.insert(std::move(key)).second) verts_.push_back(std::move(f));
  };
  if (n == 1) {
    push({0.0});
    exact_ = true;
  } else if (n <= 6) {
    std::vector<double> f;
    for (const auto& edges : all_trees(n)) {
      for (unsigned mask = 0; mask < (1u << (n - 1)); ++mask) {
        if (!solve_tree(edges, mask, d_, n, f)) continue;
        recenter(f, p_);
        if (lipschitz_feasible(f, d_, 1e-9)) push(f);
      }
    }
    exact_ = true;
  } else {
    // Candidate family: signed distance profiles plus random smoothed points.
    exact_ = false;
    double diam = d_.max_entry();
    for (size_t x0 = 0; x0 < n; ++x0) {
      std::vector<double> f(n), mf(n);
      for (size_t i = 0; i < n; ++i) { f[i] = d_(i, x0); mf[i] = -f[i]; }
      recenter(f, p_); recenter(mf, p_);
      push(f); push(mf);
    }
    std::mt19937_64 rng(0x15095ULL);
    std::uniform_real_distribution<double> u(-diam, diam);
    for (int t = 0; t < 200; ++t) {
      std::vector<double> g(n);
      for (double& x : g) x = u(rng);
      auto f = lipschitz_project(g, d_, p_);
      if (lipschitz_feasible(f, d_, 1e-9)) push(std::move(f));
    }
  }
  built_ = true;
  return verts_;
}

bool MetricSpace::vertices_exact() const {
  lipschitz_vertices();
  return exact_;
}

LipschitzVector::LipschitzVector(std::vector<double> values, const MetricSpace& g)
    : f(std::move(values)) {
  if (f.size() != g.size()) throw dimension_error("LipschitzVector: size mismatch");
  if (!lipschitz_feasible(f, g.dist(), 1e-11))
    throw std::invalid_argument("LipschitzVector: slope constraint violated");
  if (std::fabs(g.base().mean(f)) > 1e-11)
    throw std::invalid_argument("LipschitzVector: mean is not zero");
}

double abs_LG(double lambda, const MetricSpace& g) {
  if (lambda == 0.0) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : g.lipschitz_vertices())
    best = std::max(best, lse(g.base(), v, lambda));
  return std::max(best, 0.0);
}

double abs_r(double tau, const MetricSpace& g) {
  if (tau <= 0.0) return 0.0;
  auto h = [&](double lambda) { return lambda * tau - abs_LG(lambda, g); };
  double hi = 1.0;
  while (hi < 1e6 && h(2.0 * hi) > h(hi)) hi *= 2.0;
  auto [lam, val] = golden_max(h, 0.0, 2.0 * hi);
  (void)lam;
  return std::max(val, 0.0);
}

ExtReal varphi_x_vertex(double tau, const MetricSpace& g) {
  if (tau <= 1e-15) return ExtReal(0.0);
  ExtReal best = ExtReal::pos_inf();
  for (const auto& v : g.lipschitz_vertices()) {
    // W1 >= tau decomposes as Q(-v) >= tau - P(v) per vertex; P(v) = 0 here.
    std::vector<double> neg(v.size());
    for (size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
    ExtReal r = iproj_halfspace(g.base(), neg, tau).value;
    if (r < best) best = r;
  }
  return best;
}

DualResult dual_varphi_x(double tau, const MetricSpace& g, const SearchConfig& cfg) {
  size_t n = g.size();
  if (tau <= 0.0)
    return {ExtReal(0.0), {std::vector<double>(n, 0.0), {}, 0.0, 0.0}, "exact", false};
  double tau_max = 0.0;
  for (size_t j = 0; j < n; ++j) {
    std::vector<double> col(n);
    for (size_t i = 0; i < n; ++i) col[i] = g.dist()(i, j);
    tau_max = std::max(tau_max, g.base().mean(col));
  }
  if (tau >= tau_max - 1e-12)
    return {ExtReal::pos_inf(), {{}, {}, 0.0, 0.0}, "dom", false};

  auto eval = [&](const std::vector<double>& f) {
    return iproj_halfspace(g.base(), f, tau);
  };

  // Rank candidate starts by objective, then polish the best by projected
  // subgradient descent (every feasible f is a valid upper bound).
  struct Cand { double val; std::vector<double> f; };
  std::vector<Cand> cands;
  for (const auto& v : g.lipschitz_vertices()) {
    auto r = eval(v);
    if (r.value.is_finite()) cands.push_back({r.value.as_double(), v});
  }
  if (cands.empty())
    return {ExtReal::pos_inf(), {{}, {}, 0.0, 0.0}, "empty-feasible", false};
  std::sort(cands.begin(), cands.end(),
            [](const Cand& a, const Cand& b) { return a.val < b.val; });

  double best_val = cands.front().val;
  std::vector<double> best_f = cands.front().f;
  double diam = std::max(g.dist().max_entry(), 1e-9);
  size_t starts = std::min<size_t>(cands.size(), size_t(std::max(cfg.multistarts, 1)));
  for (size_t s = 0; s < starts; ++s) {
    std::vector<double> f = cands[s].f;
    double cur = cands[s].val;
    for (int it = 0; it < 80; ++it) {
      auto r = eval(f);
      if (!r.value.is_finite() || !r.minimizer) break;
      double lam = std::min(r.lambda, 1e6);
      const Distribution& t = *r.minimizer;
      double lr = 0.3 * diam / (1.0 + it / 5.0);
      std::vector<double> nf(f);
      // Objective gradient is -lambda * t; descend, then restore feasibility.
      for (size_t i = 0; i < n; ++i) nf[i] += lr * lam * t[i] / (1.0 + lam);
      nf = lipschitz_project(nf, g.dist(), g.base());
      auto nr = eval(nf);
      if (nr.value.is_finite() && nr.value.as_double() < cur - 1e-14) {
        f = std::move(nf);
        cur = nr.value.as_double();
      }
    }
    if (cur < best_val) { best_val = cur; best_f = f; }
  }
  auto fin = eval(best_f);
  std::string method = g.vertices_exact() ? "vertex+subgrad" : "heuristic+subgrad";
  return {ExtReal(std::max(best_val, 0.0)),
          {best_f, {}, fin.lambda, 0.0}, method, false};
}

EquivalenceReport check_equivalence(const MetricSpace& g,
                                    const std::vector<double>& tau_grid,
                                    const SearchConfig& cfg) {
  EquivalenceReport rep;
  rep.taus = tau_grid;
  rep.exact_vertices = g.vertices_exact();
  // The convex envelope at a grid point can lean on primal values beyond the
  // requested range, so sample internally out to the full transport radius
  // (the largest W1 distance to a point mass) before taking the envelope.
  std::vector<double> sample_taus = tau_grid;
  double t_sup = 0.0;
  for (size_t j = 0; j < g.size(); ++j) {
    std::vector<double> col(g.size());
    for (size_t i = 0; i < g.size(); ++i) col[i] = g.dist()(i, j);
    t_sup = std::max(t_sup, g.base().mean(col));
  }
  for (int k = 0; k <= 400; ++k) sample_taus.push_back(t_sup * k / 400.0);
  std::sort(sample_taus.begin(), sample_taus.end());
  std::vector<ExtReal> prim;
  prim.reserve(sample_taus.size());
  for (double t : sample_taus) {
    if (rep.exact_vertices)
      prim.push_back(varphi_x_vertex(t, g));
    else
      prim.push_back(varphi_x(t, g.base(), g.dist(), cfg).value);
  }
  PiecewiseLinear env = lce_1d(sample_taus, prim);
  rep.max_gap = 0.0;
  rep.arg_tau = tau_grid.empty() ? 0.0 : tau_grid.front();
  for (double t : tau_grid) {
    ExtReal e = env(t);
    double r = abs_r(t, g);
    rep.r_vals.push_back(r);
    double ev = e.is_finite() ? e.as_double()
                           : std::numeric_limits<double>::infinity();
    rep.envelope_vals.push_back(ev);
    double gap = e.is_finite() ? std::fabs(ev - r)
                            : std::numeric_limits<double>::infinity();
    if (gap > rep.max_gap) { rep.max_gap = gap; rep.arg_tau = t; }
  }
  return rep;
}

namespace {

struct InnerOut {
  ExtReal value;
  double lambda = 0.0;
  double eta = 0.0;
  std::optional<Distribution> tilt_x;  // ball-extreme tilt at lambda*
  std::optional<Distribution> tilt_y;  // output tilt at lambda*
  bool fallback = false;
};

// sup_{lambda>=0} lambda tau - log P_Y(e^{lambda g}) - s(lambda), where
// s(lambda) is the ball maximum of Q(lambda f); the eta-infimum inside the
// two-parameter supremum is exactly that ball value, so the problem is a 1D
// concave maximization in lambda.
InnerOut inner_two_param(const std::vector<double>& f, const std::vector<double>& g,
                         double alpha, double tau, const Distribution& px,
                         const Distribution& py) {
  auto H = [&](double lambda) {
    std::vector<double> lf(f.size());
    for (size_t i = 0; i < f.size(); ++i) lf[i] = lambda * f[i];
    return lambda * tau - lse(py, g, lambda) - kl_ball_max_mean(px, lf, alpha);
  };
  double hi = 1.0;
  bool unbounded = false;
  while (H(2.0 * hi) > H(hi) + 1e-14) {
    hi *= 2.0;
    if (hi > 1e6) { unbounded = true; break; }
  }
  if (unbounded) return {ExtReal::pos_inf(), hi, 0.0, {}, {}, false};
  auto [lam, val] = golden_max(H, 0.0, 2.0 * hi, 160);

  // Midpoint concavity audit on the bracket; a dense rescan replaces the
  // golden result when it trips.
  bool fell = false;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0 * hi);
  for (int t = 0; t < 8; ++t) {
    double a = u(rng), b = u(rng);
    if (H(0.5 * (a + b)) < 0.5 * (H(a) + H(b)) - 1e-8) { fell = true; break; }
  }
  if (fell) {
    double best = val, arg = lam;
    for (int k = 0; k <= 400; ++k) {
      double l = 2.0 * hi * k / 400.0;
      double v = H(l);
      if (v > best) { best = v; arg = l; }
    }
    auto [l2, v2] = golden_max(H, std::max(arg - hi / 100.0, 0.0), arg + hi / 100.0, 80);
    if (v2 > best) { best = v2; arg = l2; }
    val = best; lam = arg;
  }

  std::vector<double> lf(f.size());
  for (size_t i = 0; i < f.size(); ++i) lf[i] = lam * f[i];
  auto ball = kl_ball_max_mean_arg(px, lf, alpha);
  return {ExtReal(std::max(val, 0.0)), lam, ball.eta,
          ball.maximizer, tilt(py, g, lam), fell};
}

// alpha = 0 inner: sup_lambda lambda (tau - P_X(f)) - log P_Y(e^{lambda g}),
// which is a half-space I-projection value on the output side.
InnerOut inner_one_param(const std::vector<double>& f, const std::vector<double>& g,
                         double tau, const Distribution& px, const Distribution& py) {
  auto r = iproj_halfspace(py, g, tau - px.mean(f));
  InnerOut out;
  out.value = r.value;
  out.lambda = r.lambda;
  out.tilt_y = r.minimizer;
  return out;
}

struct OuterResult {
  ExtReal best = ExtReal::pos_inf();
  std::vector<double> f, g;
  double lambda = 0.0, eta = 0.0;
  bool fallback = false;
};

// Minimize the inner value over f with g the c-transform of f, by Danskin
// subgradient descent from multiple starts. Every iterate is a valid upper
// bound, so only improvements are kept.
OuterResult outer_descent(const std::vector<std::vector<double>>& starts,
                          const Distribution& px, const CostMatrix& c,
                          const std::function<InnerOut(const std::vector<double>&,
                                                       const std::vector<double>&)>& inner) {
  OuterResult out;
  double scale = std::max(c.max_entry(), 1e-9);
  auto consider = [&](const std::vector<double>& f, const std::vector<double>& g,
                      const InnerOut& r) {
    out.fallback = out.fallback || r.fallback;
    if (r.value < out.best) {
      out.best = r.value;
      out.f = f; out.g = g;
      out.lambda = r.lambda; out.eta = r.eta;
    }
  };
  for (auto f : starts) {
    auto g = c_transform(c, f);
    auto r = inner(f, g);
    consider(f, g, r);
    for (int it = 0; it < 80; ++it) {
      if (!r.value.is_finite()) {
        // Shrink toward zero to regain a finite inner value.
        for (double& x : f) x *= 0.5;
        g = c_transform(c, f);
        r = inner(f, g);
        consider(f, g, r);
        continue;
      }
      if (!r.tilt_y) break;
      double lam = std::min(r.lambda, 1e6);
      std::vector<double> grad(f.size(), 0.0);
      if (r.tilt_x) {
        for (size_t i = 0; i < f.size(); ++i) grad[i] -= lam * (*r.tilt_x)[i];
      } else {
        for (size_t i = 0; i < f.size(); ++i) grad[i] -= lam * px[i];
      }
      const Distribution& s = *r.tilt_y;
      for (size_t j = 0; j < c.cols(); ++j) {
        size_t arg = 0;
        double m = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < c.rows(); ++i)
          if (c(i, j) - f[i] < m) { m = c(i, j) - f[i]; arg = i; }
        grad[arg] += lam * s[j];
      }
      double lr = 0.5 * scale / ((1.0 + lam) * (1.0 + it / 10.0));
      std::vector<double> nf(f);
      for (size_t i = 0; i < f.size(); ++i) nf[i] -= lr * grad[i];
      auto ng = c_transform(c, nf);
      auto nr = inner(nf, ng);
      consider(nf, ng, nr);
      if (nr.value.is_finite() &&
          (!r.value.is_finite() || nr.value.as_double() <= r.value.as_double())) {
        f = std::move(nf); g = std::move(ng); r = std::move(nr);
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> default_starts(const Distribution& px,
                                                const CostMatrix& c,
                                                const std::optional<Distribution>& wx,
                                                const std::optional<Distribution>& wy,
                                                const SearchConfig& cfg) {
  std::vector<std::vector<double>> starts;
  starts.emplace_back(px.size(), 0.0);
  if (wx && wy) starts.push_back(ot_solve(*wx, *wy, c).potentials.f);
  std::mt19937_64 rng(cfg.seed ^ 0xd0a1ULL);
  std::uniform_real_distribution<double> u(-c.max_entry(), c.max_entry());
  int extra = std::max(cfg.multistarts - int(starts.size()), 2);
  for (int t = 0; t < extra; ++t) {
    std::vector<double> f(px.size());
    for (double& x : f) x = u(rng);
    starts.push_back(std::move(f));
  }
  return starts;
}

}  // namespace

DualResult dual_varphi_geq(double tau, const Distribution& p_x,
                           const Distribution& p_y, const CostMatrix& c,
                           const SearchConfig& cfg) {
  if (c.rows() != p_x.size() || c.cols() != p_y.size())
    throw dimension_error("dual_varphi_geq: cost size mismatch");
  if (tau <= 0.0)
    return {ExtReal(0.0),
            {std::vector<double>(p_x.size(), 0.0), std::vector<double>(p_y.size(), 0.0),
             0.0, 0.0}, "exact", false};
  auto primal = varphi(tau, p_x, p_y, c, cfg);
  auto starts = default_starts(p_x, c, p_x, primal.witness_y, cfg);
  auto inner = [&](const std::vector<double>& f, const std::vector<double>& g) {
    return inner_one_param(f, g, tau, p_x, p_y);
  };
  auto out = outer_descent(starts, p_x, c, inner);
  return {out.best, {out.f, out.g, out.lambda, 0.0}, "subgrad-multistart", false};
}

DualResult dual_phi_geq(double alpha, double tau, const Distribution& p_x,
                        const Distribution& p_y, const CostMatrix& c,
                        const SearchConfig& cfg) {
  if (c.rows() != p_x.size() || c.cols() != p_y.size())
    throw dimension_error("dual_phi_geq: cost size mismatch");
  if (alpha <= 0.0) {
    auto r = dual_varphi_geq(tau, p_x, p_y, c, cfg);
    r.method = "zero-ball";
    return r;
  }
  if (tau <= 0.0)
    return {ExtReal(0.0),
            {std::vector<double>(p_x.size(), 0.0), std::vector<double>(p_y.size(), 0.0),
             0.0, 0.0}, "exact", false};
  auto primal = phi_geq(alpha, tau, p_x, p_y, c, cfg);
  auto starts = default_starts(p_x, c, primal.witness_x, primal.witness_y, cfg);
  auto inner = [&](const std::vector<double>& f, const std::vector<double>& g) {
    return inner_two_param(f, g, alpha, tau, p_x, p_y);
  };
  auto out = outer_descent(starts, p_x, c, inner);
  return {out.best, {out.f, out.g, out.lambda, out.eta}, "t5-subgrad", out.fallback};
}

namespace {

// Single-candidate value of the two-branch dual expression.
struct CandEval {
  double value = 0.0;
  double lambda = 0.0;
  double eta = 0.0;
};

CandEval eval_psi_candidate(const PsiDualCandidate& cand, double alpha, double tau,
                            const Distribution& px, const Distribution& py) {
  const PotentialPair* ws[2] = {&cand.w0, &cand.w1};
  auto branch = [&](int w, double lambda, double eta) {
    std::vector<double> lf(ws[w]->f.size());
    for (size_t i = 0; i < lf.size(); ++i) lf[i] = (lambda / eta) * ws[w]->f[i];
    return eta * alpha + eta * lse(px, lf, 1.0) - lse(py, ws[w]->g, -lambda);
  };
  double best = 0.0, best_lam = 0.0, best_eta = 1.0;
  auto inner = [&](double lambda, double* eta_out) {
    auto F = [&](double t) {
      double eta = std::exp(t);
      return std::max(branch(0, lambda, eta), branch(1, lambda, eta));
    };
    auto [t, v] = golden_min(F, -18.0, 18.0, 110);
    if (eta_out) *eta_out = std::exp(t);
    return v - lambda * tau;
  };
  std::vector<double> lams = {0.0};
  for (int k = 0; k <= 40; ++k) lams.push_back(std::pow(10.0, -4.0 + 7.0 * k / 40.0));
  size_t arg = 0;
  for (size_t k = 1; k < lams.size(); ++k) {
    double v = inner(lams[k], nullptr);
    if (v > best) { best = v; arg = k; }
  }
  if (arg > 0) {
    double lo = lams[arg - 1];
    double hi = arg + 1 < lams.size() ? lams[arg + 1] : 2.0 * lams[arg];
    auto [lam, v] = golden_max([&](double l) { return inner(l, nullptr); }, lo, hi, 80);
    if (v > best) { best = v; best_lam = lam; }
    else best_lam = lams[arg];
    inner(best_lam, &best_eta);
  }
  return {std::max(best, 0.0), best_lam, best_eta};
}

void clamp_feasible(PotentialPair& p, const CostMatrix& c) {
  auto g = c_transform(c, p.f);
  if (p.g.size() != g.size()) { p.g = g; return; }
  for (size_t j = 0; j < g.size(); ++j) p.g[j] = std::min(p.g[j], g[j]);
}

}  // namespace

PsiDualResult dual_psi(double alpha, double tau, const Distribution& p_x,
                       const Distribution& p_y, const CostMatrix& c,
                       const std::vector<PsiDualCandidate>& candidates) {
  if (c.rows() != p_x.size() || c.cols() != p_y.size())
    throw dimension_error("dual_psi: cost size mismatch");
  std::vector<PsiDualCandidate> pool = candidates;
  for (auto& cand : pool) {
    clamp_feasible(cand.w0, c);
    clamp_feasible(cand.w1, c);
  }
  PotentialPair zero{std::vector<double>(p_x.size(), 0.0),
                     c_transform(c, std::vector<double>(p_x.size(), 0.0))};
  pool.push_back({zero, zero});
  if (p_x.size() == 2 && p_y.size() == 2) {
    // One-slope family covers all binary potentials up to a constant shift.
    double cm = std::max(c.max_entry(), 1e-9);
    std::vector<PotentialPair> fam;
    for (int k = -16; k <= 16; ++k) {
      std::vector<double> f = {0.0, cm * k / 16.0};
      fam.push_back({f, c_transform(c, f)});
    }
    for (size_t a = 0; a < fam.size(); ++a)
      for (size_t b = a; b < fam.size(); ++b) pool.push_back({fam[a], fam[b]});
  }
  PsiDualResult res;
  res.value = ExtReal(0.0);
  res.best = pool.front();
  for (const auto& cand : pool) {
    auto e = eval_psi_candidate(cand, alpha, tau, p_x, p_y);
    if (!res.value.is_finite() || e.value > res.value.as_double()) {
      res.value = ExtReal(e.value);
      res.best = cand;
      res.lambda = e.lambda;
      res.eta = e.eta;
    }
  }
  return res;
}

std::vector<PsiDualCandidate> psi_dual_candidates(const PsiResult& primal,
                                                  const CostMatrix& c) {
  std::vector<PsiDualCandidate> out;
  if (!primal.witness_w || !primal.witness_x || !primal.witness_y) return out;
  std::vector<PotentialPair> pairs;
  for (size_t w = 0; w < primal.witness_w->size() && w < 2; ++w) {
    auto sol = ot_solve(primal.witness_x->row(w), primal.witness_y->row(w), c);
    pairs.push_back({sol.potentials.f, sol.potentials.g});
  }
  if (pairs.size() == 1) pairs.push_back(pairs.front());
  out.push_back({pairs[0], pairs[1]});
  out.push_back({pairs[0], pairs[0]});
  out.push_back({pairs[1], pairs[1]});
  return out;
}

}  // namespace iso
