#include "iso/bruteforce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "iso/divergence.hpp"
#include "iso/transport.hpp"

namespace iso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEnlargeSlack = 1e-12;

size_t pow_sz(size_t base, size_t exp) {
  size_t r = 1;
  for (size_t k = 0; k < exp; ++k) {
    if (r > (size_t(1) << 25) / std::max<size_t>(base, 1))
      throw std::invalid_argument("product space exceeds the 2^25 guard");
    r *= base;
  }
  return r;
}

// Per-point product probabilities in lexicographic order.
std::vector<double> point_probs(const Distribution& p, size_t n, size_t k) {
  std::vector<double> out(k, 1.0);
  for (size_t idx = 0; idx < k; ++idx) {
    size_t rem = idx;
    for (size_t pos = 0; pos < n; ++pos) {
      out[idx] *= p[rem % p.size()];
      rem /= p.size();
    }
  }
  return out;
}

// Additive costs between all product points.
std::vector<std::vector<double>> product_costs(const CostMatrix& c, size_t n,
                                               size_t kx, size_t ky) {
  std::vector<std::vector<double>> cost(kx, std::vector<double>(ky, 0.0));
  for (size_t i = 0; i < kx; ++i) {
    auto xs = unrank_point(i, n, c.rows());
    for (size_t j = 0; j < ky; ++j) {
      auto ys = unrank_point(j, n, c.cols());
      double s = 0.0;
      for (size_t pos = 0; pos < n; ++pos) s += c(xs[pos], ys[pos]);
      cost[i][j] = s;
    }
  }
  return cost;
}

// For each y point, the bitmask of x points within distance t.
std::vector<std::uint32_t> reach_masks(const std::vector<std::vector<double>>& cost,
                                       double t) {
  size_t kx = cost.size(), ky = cost.front().size();
  std::vector<std::uint32_t> reach(ky, 0);
  for (size_t j = 0; j < ky; ++j)
    for (size_t i = 0; i < kx; ++i)
      if (cost[i][j] <= t + kEnlargeSlack) reach[j] |= std::uint32_t(1) << i;
  return reach;
}

SubsetMask mask_from_bits(std::uint32_t bits, size_t n, size_t alphabet, size_t k) {
  SubsetMask m = SubsetMask::empty(n, alphabet);
  for (size_t i = 0; i < k; ++i)
    if (bits >> i & 1u) m.points[i] = true;
  return m;
}

// The n-type (count vector) of a product point.
std::vector<int> point_type(size_t idx, size_t n, size_t alphabet) {
  std::vector<int> t(alphabet, 0);
  size_t rem = idx;
  for (size_t pos = 0; pos < n; ++pos) {
    ++t[rem % alphabet];
    rem /= alphabet;
  }
  return t;
}

// Subset candidates over k <= 25 points: everything when 2^k fits the
// exhaustive budget, otherwise seeded random masks plus the structured ones.
std::vector<std::uint32_t> candidate_masks(size_t k, size_t n, size_t alphabet,
                                           std::uint64_t seed, bool* sampled) {
  std::vector<std::uint32_t> out;
  if (k <= 16) {
    *sampled = false;
    out.resize(size_t(1) << k);
    for (size_t m = 0; m < out.size(); ++m) out[m] = std::uint32_t(m);
    return out;
  }
  if (k > 25) throw std::invalid_argument("subset scan: more than 25 product points");
  *sampled = true;
  std::uint32_t full = k == 32 ? ~0u : (std::uint32_t(1) << k) - 1;
  std::set<std::uint32_t> seen;
  auto push = [&](std::uint32_t m) { seen.insert(m & full); };
  push(0);
  push(full);
  for (size_t i = 0; i < k; ++i) {
    push(std::uint32_t(1) << i);
    push(full ^ (std::uint32_t(1) << i));
  }
  // Exchangeable masks: unions of type classes (sampled when too many).
  std::vector<std::vector<int>> types;
  std::vector<size_t> class_of(k);
  for (size_t i = 0; i < k; ++i) {
    auto t = point_type(i, n, alphabet);
    auto it = std::find(types.begin(), types.end(), t);
    if (it == types.end()) {
      class_of[i] = types.size();
      types.push_back(t);
    } else {
      class_of[i] = size_t(it - types.begin());
    }
  }
  std::vector<std::uint32_t> class_mask(types.size(), 0);
  for (size_t i = 0; i < k; ++i) class_mask[class_of[i]] |= std::uint32_t(1) << i;
  if (types.size() <= 15) {
    for (std::uint32_t s = 0; s < (std::uint32_t(1) << types.size()); ++s) {
      std::uint32_t m = 0;
      for (size_t t = 0; t < types.size(); ++t)
        if (s >> t & 1u) m |= class_mask[t];
      push(m);
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint32_t> u(0, full);
  for (int i = 0; i < 100000; ++i) push(u(rng));
  out.assign(seen.begin(), seen.end());
  return out;
}

double log_binom_pmf(size_t n, size_t w, double p) {
  if (p <= 0.0) return w == 0 ? 0.0 : -kInf;
  if (p >= 1.0) return w == n ? 0.0 : -kInf;
  return std::lgamma(double(n) + 1) - std::lgamma(double(w) + 1) -
         std::lgamma(double(n - w) + 1) + double(w) * std::log(p) +
         double(n - w) * std::log1p(-p);
}

double log_add(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Compositions of n into m nonnegative parts.
void gen_types(size_t m, int n, std::vector<int>& cur,
               std::vector<std::vector<int>>& out) {
  if (cur.size() + 1 == m) {
    cur.push_back(n);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = 0; k <= n; ++k) {
    cur.push_back(k);
    gen_types(m, n - k, cur, out);
    cur.pop_back();
  }
}

double log_multinomial_mass(const std::vector<int>& type, const Distribution& p) {
  double n = 0.0;
  for (int k : type) n += k;
  double lg = std::lgamma(n + 1);
  for (size_t i = 0; i < type.size(); ++i) {
    if (type[i] == 0) continue;
    if (p[i] <= 0.0) return -kInf;
    lg += -std::lgamma(double(type[i]) + 1) + double(type[i]) * std::log(p[i]);
  }
  return lg;
}

Distribution type_fraction(const std::vector<int>& type, size_t n) {
  std::vector<double> m(type.size());
  for (size_t i = 0; i < type.size(); ++i) m[i] = double(type[i]) / double(n);
  return Distribution(std::move(m));
}

}  // namespace

SubsetMask SubsetMask::empty(size_t n, size_t alphabet) {
  SubsetMask m;
  m.n = n;
  m.alphabet = alphabet;
  m.points.assign(pow_sz(alphabet, n), false);
  return m;
}

size_t SubsetMask::count() const {
  size_t s = 0;
  for (bool b : points) s += b;
  return s;
}

bool SubsetMask::includes(const SubsetMask& other) const {
  if (n != other.n || alphabet != other.alphabet)
    throw dimension_error("SubsetMask: shape mismatch");
  for (size_t i = 0; i < points.size(); ++i)
    if (other.points[i] && !points[i]) return false;
  return true;
}

size_t product_size(size_t alphabet, size_t n) { return pow_sz(alphabet, n); }

std::vector<size_t> unrank_point(size_t idx, size_t n, size_t alphabet) {
  std::vector<size_t> xs(n);
  for (size_t pos = n; pos-- > 0;) {  // first letter most significant
    xs[pos] = idx % alphabet;
    idx /= alphabet;
  }
  return xs;
}

double product_mass(const SubsetMask& a, const Distribution& p) {
  if (a.alphabet != p.size()) throw dimension_error("product_mass: alphabet mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.points.size(); ++i) {
    if (!a.points[i]) continue;
    double q = 1.0;
    size_t rem = i;
    for (size_t pos = 0; pos < a.n; ++pos) {
      q *= p[rem % p.size()];
      rem /= p.size();
    }
    s += q;
  }
  return s;
}

SubsetMask enlarge(const SubsetMask& a, double t, const CostMatrix& c) {
  if (a.alphabet != c.rows()) throw dimension_error("enlarge: alphabet mismatch");
  SubsetMask out = SubsetMask::empty(a.n, c.cols());
  std::vector<size_t> members;
  for (size_t i = 0; i < a.points.size(); ++i)
    if (a.points[i]) members.push_back(i);
  for (size_t j = 0; j < out.points.size(); ++j) {
    auto ys = unrank_point(j, a.n, c.cols());
    for (size_t i : members) {
      auto xs = unrank_point(i, a.n, c.rows());
      double s = 0.0;
      for (size_t pos = 0; pos < a.n && s <= t + kEnlargeSlack; ++pos)
        s += c(xs[pos], ys[pos]);
      if (s <= t + kEnlargeSlack) {
        out.points[j] = true;
        break;
      }
    }
  }
  return out;
}

GammaResult gamma_exhaustive(size_t n, double a, double t, const Distribution& p_x,
                             const Distribution& p_y, const CostMatrix& c,
                             std::uint64_t seed) {
  if (c.rows() != p_x.size() || c.cols() != p_y.size())
    throw dimension_error("gamma_exhaustive: cost size mismatch");
  size_t kx = pow_sz(p_x.size(), n), ky = pow_sz(p_y.size(), n);
  if (kx > 25 || ky > (size_t(1) << 20))
    throw std::invalid_argument("gamma_exhaustive: size guard");
  auto px = point_probs(p_x, n, kx);
  auto py = point_probs(p_y, n, ky);
  auto cost = product_costs(c, n, kx, ky);
  auto reach = reach_masks(cost, t);
  bool sampled = false;
  auto masks = candidate_masks(kx, n, p_x.size(), seed, &sampled);

  double best = kInf;
  std::uint32_t best_mask = 0;
  for (std::uint32_t m : masks) {
    double pa = 0.0;
    for (size_t i = 0; i < kx; ++i)
      if (m >> i & 1u) pa += px[i];
    if (pa < a - 1e-12) continue;
    double val = 0.0;
    for (size_t j = 0; j < ky; ++j)
      if (m & reach[j]) val += py[j];
    if (val < best - 1e-15) {  // ties keep the lexicographically first mask
      best = val;
      best_mask = m;
    }
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("gamma_exhaustive: no admissible set at this mass");
  return {best, mask_from_bits(best_mask, n, p_x.size(), kx),
          sampled ? "sampled" : "exhaustive"};
}

GammaTypeResult gamma_exchangeable(size_t n, double a, double t,
                                   const Distribution& p_x,
                                   const Distribution& p_y, const CostMatrix& c) {
  if (c.rows() != p_x.size() || c.cols() != p_y.size())
    throw dimension_error("gamma_exchangeable: cost size mismatch");
  std::vector<std::vector<int>> tx, ty;
  std::vector<int> cur;
  gen_types(p_x.size(), int(n), cur, tx);
  cur.clear();
  gen_types(p_y.size(), int(n), cur, ty);
  if (tx.size() > 10000 || ty.size() > 10000)
    throw std::invalid_argument("gamma_exchangeable: type-count guard");

  std::vector<double> lmx(tx.size()), lmy(ty.size());
  for (size_t i = 0; i < tx.size(); ++i) lmx[i] = log_multinomial_mass(tx[i], p_x);
  for (size_t j = 0; j < ty.size(); ++j) lmy[j] = log_multinomial_mass(ty[j], p_y);

  auto family_value = [&](const std::vector<size_t>& fam) {
    double lv = -kInf;
    for (size_t j = 0; j < ty.size(); ++j) {
      if (lmy[j] == -kInf) continue;
      auto r = type_fraction(ty[j], n);
      bool member = false;
      for (size_t qi : fam) {
        double v = double(n) * ot_value(type_fraction(tx[qi], n), r, c);
        if (v <= t + 1e-9) { member = true; break; }
      }
      if (member) lv = log_add(lv, lmy[j]);
    }
    return lv == -kInf ? 0.0 : std::min(std::exp(lv), 1.0);
  };

  // Orderings: mass-greedy, then divergence balls around tilted centers.
  std::vector<std::vector<size_t>> orderings;
  {
    std::vector<size_t> idx(tx.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t u, size_t v) { return lmx[u] > lmx[v]; });
    orderings.push_back(idx);
  }
  std::vector<Distribution> centers = {p_x};
  for (size_t k = 0; k < p_x.size(); ++k) {
    std::vector<double> e(p_x.size(), 0.0);
    e[k] = 1.0;
    for (double lam : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0})
      centers.push_back(tilt(p_x, e, lam));
  }
  for (const auto& ctr : centers) {
    std::vector<double> score(tx.size());
    for (size_t i = 0; i < tx.size(); ++i)
      score[i] = kl(type_fraction(tx[i], n), ctr).as_double();
    std::vector<size_t> idx(tx.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](size_t u, size_t v) {
      if (score[u] != score[v]) return score[u] < score[v];
      return lmx[u] > lmx[v];
    });
    orderings.push_back(std::move(idx));
  }

  double best = kInf;
  std::vector<size_t> best_fam;
  for (const auto& order : orderings) {
    std::vector<size_t> fam;
    double mass = 0.0;
    for (size_t qi : order) {
      if (lmx[qi] == -kInf) continue;
      fam.push_back(qi);
      mass += std::exp(lmx[qi]);
      if (mass >= a - 1e-12) break;
    }
    if (mass < a - 1e-12) continue;
    double v = family_value(fam);
    if (v < best) { best = v; best_fam = fam; }
  }
  if (!std::isfinite(best))
    throw std::invalid_argument("gamma_exchangeable: no admissible family");
  TypeSet ts;
  ts.n = n;
  for (size_t qi : best_fam) ts.types.push_back(tx[qi]);
  return {best, std::move(ts)};
}

GammaLevelsResult gamma_levels(size_t n, double a, double t, double p) {
  if (n == 0 || n > 10000) throw std::invalid_argument("gamma_levels: n guard");
  std::vector<double> lpmf(n + 1);
  for (size_t w = 0; w <= n; ++w) lpmf[w] = log_binom_pmf(n, w, p);
  // Log prefix/suffix tails and a linear prefix for the mass constraint.
  std::vector<double> lpre(n + 2, -kInf), lsuf(n + 2, -kInf), cum(n + 2, 0.0);
  for (size_t w = 0; w <= n; ++w) lpre[w + 1] = log_add(lpre[w], lpmf[w]);
  for (size_t w = n + 1; w-- > 0;) lsuf[w] = log_add(lsuf[w + 1], lpmf[w]);
  for (size_t w = 0; w <= n; ++w) cum[w + 1] = cum[w] + std::exp(lpmf[w]);

  long shift = t >= 0 ? long(std::floor(t + kEnlargeSlack)) : 0;
  double best_lom = -kInf;  // maximize log(1 - Gamma)
  int bl = 0, bh = int(n);
  bool found = false;
  for (size_t w1 = 0; w1 <= n; ++w1) {
    for (size_t w2 = w1; w2 <= n; ++w2) {
      double mass = cum[w2 + 1] - cum[w1];
      if (mass < a - 1e-12) continue;
      long lo = std::max(long(w1) - shift, 0L);
      long hi = std::min(long(w2) + shift, long(n));
      double lom = log_add(lpre[lo], lsuf[hi + 1]);  // P below + P above
      if (!found || lom > best_lom + 1e-15) {
        best_lom = lom;
        bl = int(w1);
        bh = int(w2);
        found = true;
      }
    }
  }
  if (!found) throw std::invalid_argument("gamma_levels: no band reaches the mass");
  double omg = best_lom == -kInf ? 0.0 : std::exp(best_lom);
  return {1.0 - omg, best_lom, bl, bh};
}

ExponentPair exponents_E(size_t n, double gamma, std::optional<double> log_gamma,
                         std::optional<double> log_one_minus) {
  if (n == 0) throw std::invalid_argument("exponents_E: n = 0");
  ExponentPair out;
  double lg = log_gamma ? *log_gamma : (gamma > 0.0 ? std::log(gamma) : -kInf);
  double lom = log_one_minus ? *log_one_minus
                             : (gamma < 1.0 ? std::log1p(-gamma) : -kInf);
  out.e0 = lg == -kInf ? ExtReal::pos_inf() : ExtReal(std::max(-lg / double(n), 0.0));
  out.e1 = lom == -kInf ? ExtReal::pos_inf() : ExtReal(std::max(-lom / double(n), 0.0));
  return out;
}

TalagrandReport talagrand_sweep(size_t n, const std::vector<double>& lambda_grid,
                                double tau, const Distribution& p_x,
                                const Distribution& p_y, const CostMatrix& c,
                                const std::function<ExtReal(double)>& env) {
  size_t kx = pow_sz(p_x.size(), n), ky = pow_sz(p_y.size(), n);
  if (kx > 16 || ky > 16)
    throw std::invalid_argument("talagrand_sweep: exhaustive-scale guard");
  auto px = point_probs(p_x, n, kx);
  auto py = point_probs(p_y, n, ky);
  auto reach = reach_masks(product_costs(c, n, kx, ky), double(n) * tau);

  size_t total = size_t(1) << kx;
  std::vector<double> pa(total, 0.0), pc(total, 0.0);
  for (size_t m = 0; m < total; ++m) {
    for (size_t i = 0; i < kx; ++i)
      if (m >> i & 1u) pa[m] += px[i];
    for (size_t j = 0; j < ky; ++j)
      if (!(m & reach[j])) pc[m] += py[j];  // complement of the enlargement
  }

  TalagrandReport rep;
  rep.worst_slack = kInf;
  for (double lam : lambda_grid) {
    ExtReal e = env(lam);
    double rhs_log = e.is_pos_inf() ? -kInf : -double(n) * e.as_double();
    for (size_t m = 0; m < total; ++m) {
      double lhs_log = 0.0;
      if (lam > 0.0) lhs_log += pa[m] > 0.0 ? lam * std::log(pa[m]) : -kInf;
      if (lam < 1.0) lhs_log += pc[m] > 0.0 ? (1.0 - lam) * std::log(pc[m]) : -kInf;
      ++rep.checked;
      if (lhs_log == -kInf) continue;  // LHS = 0 never violates
      double slack = rhs_log - lhs_log;
      if (slack < rep.worst_slack) {
        rep.worst_slack = slack;
        rep.witness_lambda = lam;
        rep.witness = mask_from_bits(std::uint32_t(m), n, p_x.size(), kx);
      }
    }
  }
  return rep;
}

DimensionFreeReport dimension_free_check(size_t n, const std::vector<double>& tau_grid,
                                         const Distribution& p_x,
                                         const Distribution& p_y, const CostMatrix& c,
                                         const Envelope2D& envelope, double tau_step,
                                         double tol, std::uint64_t seed) {
  size_t kx = pow_sz(p_x.size(), n), ky = pow_sz(p_y.size(), n);
  if (ky > (size_t(1) << 20))
    throw std::invalid_argument("dimension_free_check: output space guard");
  auto px = point_probs(p_x, n, kx);
  auto py = point_probs(p_y, n, ky);
  auto cost = product_costs(c, n, kx, ky);
  bool sampled = false;
  auto masks = candidate_masks(kx, n, p_x.size(), seed, &sampled);

  DimensionFreeReport rep;
  rep.worst_margin = kInf;
  for (double tg : tau_grid) {
    auto reach = reach_masks(cost, double(n) * tg);
    for (std::uint32_t m : masks) {
      if (m == 0) continue;
      double pa = 0.0;
      for (size_t i = 0; i < kx; ++i)
        if (m >> i & 1u) pa += px[i];
      if (pa <= 0.0) continue;
      double alpha = -std::log(pa) / double(n);
      double pcomp = 0.0;
      for (size_t j = 0; j < ky; ++j)
        if (!(m & reach[j])) pcomp += py[j];
      if (pcomp <= 0.0) {
        ++rep.vacuous;
        continue;
      }
      double e1 = -std::log(pcomp) / double(n);
      // Sampled envelopes under-resolve between grid nodes; stepping the
      // query down one tau cell keeps the comparison sound.
      ExtReal b = envelope.query(alpha, std::max(tg - tau_step, 0.0));
      if (!b.is_finite()) {
        ++rep.dom_skipped;
        continue;
      }
      ++rep.checked;
      double margin = e1 - b.value();
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.witness_alpha = alpha;
        rep.witness_tau = tg;
      }
      if (margin < -tol) ++rep.violations;
    }
  }
  return rep;
}

StrassenResult strassen_gt(size_t n, double t, const Distribution& p_x,
                           const Distribution& p_y, const CostMatrix& c) {
  size_t kx = pow_sz(p_x.size(), n), ky = pow_sz(p_y.size(), n);
  if (kx > 64 || ky > 64) throw std::invalid_argument("strassen_gt: LP size guard");
  if (kx > 20) throw std::invalid_argument("strassen_gt: subset sweep guard");
  auto px = point_probs(p_x, n, kx);
  auto py = point_probs(p_y, n, ky);
  auto cost = product_costs(c, n, kx, ky);

  std::vector<std::vector<double>> excess(kx, std::vector<double>(ky, 0.0));
  for (size_t i = 0; i < kx; ++i)
    for (size_t j = 0; j < ky; ++j)
      excess[i][j] = cost[i][j] > t + kEnlargeSlack ? 1.0 : 0.0;
  double lp = ot_value(Distribution(px), Distribution(py), CostMatrix(excess));

  auto reach = reach_masks(cost, t);
  double sup = 0.0;
  for (size_t m = 0; m < (size_t(1) << kx); ++m) {
    double pa = 0.0, pe = 0.0;
    for (size_t i = 0; i < kx; ++i)
      if (m >> i & 1u) pa += px[i];
    for (size_t j = 0; j < ky; ++j)
      if (m & reach[j]) pe += py[j];
    sup = std::max(sup, pa - pe);
  }
  return {lp, sup, lp - sup};
}

ConvergenceTable convergence_report(const std::vector<size_t>& n_list, double tau,
                                    double a, const Distribution& p_x,
                                    const Distribution& p_y, const CostMatrix& c,
                                    double envelope_ref, double legendre_ref) {
  ConvergenceTable table;
  table.envelope_ref = envelope_ref;
  table.legendre_ref = legendre_ref;
  bool binary_hamming =
      p_x.size() == 2 && p_y.size() == 2 && c.is_hamming() &&
      std::fabs(p_x[1] - p_y[1]) < 1e-15;
  for (size_t n : n_list) {
    ConvergenceRow row;
    row.n = n;
    double t = double(n) * tau;
    bool done = false;
    if (!done) {
      try {
        if (pow_sz(p_x.size(), n) <= 16) {
          auto g = gamma_exhaustive(n, a, t, p_x, p_y, c);
          auto e = exponents_E(n, g.value);
          row = {n, g.value, e.e0, e.e1, "exhaustive"};
          done = true;
        }
      } catch (const std::invalid_argument&) {
      }
    }
    if (!done && binary_hamming && n <= 10000) {
      auto g = gamma_levels(n, a, t, p_x[1]);
      auto e = exponents_E(n, g.value, std::nullopt, g.log_one_minus);
      row = {n, g.value, e.e0, e.e1, "levels"};
      done = true;
    }
    if (!done) {
      try {
        auto g = gamma_exchangeable(n, a, t, p_x, p_y, c);
        auto e = exponents_E(n, g.value);
        row = {n, g.value, e.e0, e.e1, "types"};
        done = true;
      } catch (const std::invalid_argument&) {
      }
    }
    if (!done) row = {n, 0.0, ExtReal(0.0), ExtReal(0.0), "skipped"};
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace iso
