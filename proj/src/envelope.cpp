#include "iso/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "iso/smalllp.hpp"

namespace iso {

ExtReal PiecewiseLinear::operator()(double x) const {
  if (xs.empty()) return ExtReal::pos_inf();
  if (x < xs.front() - 1e-12 || x > xs.back() + 1e-12) return ExtReal::pos_inf();
  if (xs.size() == 1) return ExtReal(ys.front());
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  size_t hi = std::min<size_t>(std::max<ptrdiff_t>(it - xs.begin(), 1), xs.size() - 1);
  size_t lo = hi - 1;
  double t = (x - xs[lo]) / (xs[hi] - xs[lo]);
  t = std::clamp(t, 0.0, 1.0);
  return ExtReal(ys[lo] + t * (ys[hi] - ys[lo]));
}

namespace {

PiecewiseLinear lower_hull(const std::vector<double>& xs,
                           const std::vector<ExtReal>& vs) {
  if (xs.size() != vs.size()) throw std::invalid_argument("lce_1d: size mismatch");
  // Collapse duplicate x to the min finite value.
  std::map<double, double> pts;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!vs[i].is_finite()) continue;
    auto [it, fresh] = pts.emplace(xs[i], vs[i].value());
    if (!fresh) it->second = std::min(it->second, vs[i].value());
  }
  PiecewiseLinear out;
  if (pts.size() < 2) {
    out.degenerate = true;
    for (auto& [x, y] : pts) {
      out.xs.push_back(x);
      out.ys.push_back(y);
    }
    return out;
  }
  std::vector<double> hx, hy;
  for (auto& [x, y] : pts) {
    while (hx.size() >= 2) {
      size_t k = hx.size();
      double cross = (hx[k - 1] - hx[k - 2]) * (y - hy[k - 2]) -
                     (x - hx[k - 2]) * (hy[k - 1] - hy[k - 2]);
      if (cross > 1e-15 * std::max(1.0, std::fabs(y)))
        break;  // convex turn, keep the middle point
      hx.pop_back();
      hy.pop_back();
    }
    hx.push_back(x);
    hy.push_back(y);
  }
  out.xs = std::move(hx);
  out.ys = std::move(hy);
  return out;
}

}  // namespace

PiecewiseLinear lce_1d(const std::vector<double>& xs, const std::vector<ExtReal>& vs) {
  return lower_hull(xs, vs);
}

PiecewiseLinear uce_1d(const std::vector<double>& xs, const std::vector<ExtReal>& vs) {
  std::vector<ExtReal> neg;
  neg.reserve(vs.size());
  for (const auto& v : vs) neg.push_back(-v);
  PiecewiseLinear h = lower_hull(xs, neg);
  for (double& y : h.ys) y = -y;
  return h;
}

double gen_inverse(const PiecewiseLinear& f, double alpha) {
  if (f.xs.empty()) return 0.0;
  if (alpha <= f.ys.front()) return std::max(f.xs.front(), 0.0);
  for (size_t k = 1; k < f.xs.size(); ++k) {
    if (f.ys[k] >= alpha) {
      double lo = f.ys[k - 1], hi = f.ys[k];
      if (hi <= lo + 1e-300) return f.xs[k];
      double t = (alpha - lo) / (hi - lo);
      return f.xs[k - 1] + t * (f.xs[k] - f.xs[k - 1]);
    }
  }
  return f.xs.back();  // f jumps to +inf at the right dom edge
}

void ExponentCurve::validate() const {
  auto strictly_increasing = [](const std::vector<double>& g) {
    for (size_t i = 1; i < g.size(); ++i)
      if (!(g[i] > g[i - 1])) return false;
    return true;
  };
  if (!strictly_increasing(alpha_grid) || !strictly_increasing(tau_grid))
    throw std::invalid_argument("ExponentCurve: grids must be strictly increasing");
  if (values.size() != alpha_grid.size())
    throw std::invalid_argument("ExponentCurve: value rows mismatch");
  for (const auto& row : values)
    if (row.size() != tau_grid.size())
      throw std::invalid_argument("ExponentCurve: value cols mismatch");
}

Envelope2D::Envelope2D(const ExponentCurve& curve) {
  curve.validate();
  for (size_t i = 0; i < curve.alpha_grid.size(); ++i)
    for (size_t j = 0; j < curve.tau_grid.size(); ++j)
      if (curve.values[i][j].is_finite())
        pts_.push_back({curve.alpha_grid[i], curve.tau_grid[j],
                        curve.values[i][j].value()});
}

ExtReal Envelope2D::query(double alpha, double tau) const {
  if (pts_.empty()) return ExtReal::pos_inf();
  size_t k = pts_.size();
  std::vector<std::vector<double>> A(3, std::vector<double>(k));
  std::vector<double> c(k);
  for (size_t i = 0; i < k; ++i) {
    A[0][i] = pts_[i][0];
    A[1][i] = pts_[i][1];
    A[2][i] = 1.0;
    c[i] = pts_[i][2];
  }
  LpResult r = solve_equality_lp(A, {alpha, tau, 1.0}, c);
  if (r.status != LpResult::Status::kOptimal) return ExtReal::pos_inf();
  return ExtReal(r.value);
}

}  // namespace iso
