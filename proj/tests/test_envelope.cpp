#include <cmath>
#include <random>

#include "doctest.h"
#include "iso/divergence.hpp"
#include "iso/envelope.hpp"

using namespace iso;

namespace {

// O(k^2) chord oracle: min over pairs of sample points bracketing x.
double chord_oracle(const std::vector<double>& xs, const std::vector<double>& ys,
                    double x) {
  double best = 1e300;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (std::fabs(xs[i] - x) < 1e-12) best = std::min(best, ys[i]);
    for (size_t j = 0; j < xs.size(); ++j) {
      if (xs[i] >= xs[j]) continue;
      if (x < xs[i] - 1e-12 || x > xs[j] + 1e-12) continue;
      double t = (x - xs[i]) / (xs[j] - xs[i]);
      best = std::min(best, ys[i] + t * (ys[j] - ys[i]));
    }
  }
  return best;
}

// Brute-force <=3-point-mixture minimum over a flattened cloud, by closed-form
// linear solves (independent of the LP in Envelope2D).
double mixture3_oracle(const std::vector<std::array<double, 3>>& pts, double a,
                       double t) {
  double best = 1e300;
  size_t k = pts.size();
  for (size_t i = 0; i < k; ++i)
    if (std::fabs(pts[i][0] - a) < 1e-10 && std::fabs(pts[i][1] - t) < 1e-10)
      best = std::min(best, pts[i][2]);
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j) {
      double dx = pts[j][0] - pts[i][0], dy = pts[j][1] - pts[i][1];
      double rx = a - pts[i][0], ry = t - pts[i][1];
      double den = dx * dx + dy * dy;
      if (den < 1e-20) continue;
      double w = (rx * dx + ry * dy) / den;
      if (w < -1e-9 || w > 1.0 + 1e-9) continue;
      if (std::fabs(rx - w * dx) > 1e-8 || std::fabs(ry - w * dy) > 1e-8) continue;
      best = std::min(best, pts[i][2] + w * (pts[j][2] - pts[i][2]));
    }
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j)
      for (size_t l = j + 1; l < k; ++l) {
        // Solve [a_i a_j a_l; t_i t_j t_l; 1 1 1] w = [a; t; 1] by Cramer.
        double m[3][3] = {{pts[i][0], pts[j][0], pts[l][0]},
                          {pts[i][1], pts[j][1], pts[l][1]},
                          {1.0, 1.0, 1.0}};
        double det = m[0][0] * (m[1][1] - m[1][2]) - m[0][1] * (m[1][0] - m[1][2]) +
                     m[0][2] * (m[1][0] - m[1][1]);
        if (std::fabs(det) < 1e-12) continue;
        double rhs[3] = {a, t, 1.0};
        double w[3];
        for (int col = 0; col < 3; ++col) {
          double mm[3][3];
          for (int r = 0; r < 3; ++r)
            for (int cc = 0; cc < 3; ++cc) mm[r][cc] = cc == col ? rhs[r] : m[r][cc];
          double d2 = mm[0][0] * (mm[1][1] * mm[2][2] - mm[1][2] * mm[2][1]) -
                      mm[0][1] * (mm[1][0] * mm[2][2] - mm[1][2] * mm[2][0]) +
                      mm[0][2] * (mm[1][0] * mm[2][1] - mm[1][1] * mm[2][0]);
          w[col] = d2 / det;
        }
        if (w[0] < -1e-9 || w[1] < -1e-9 || w[2] < -1e-9) continue;
        best = std::min(best, w[0] * pts[i][2] + w[1] * pts[j][2] + w[2] * pts[l][2]);
      }
  return best;
}

}  // namespace

TEST_CASE("lce_1d on convex input is the identity") {
  std::vector<double> xs;
  std::vector<ExtReal> vs;
  for (double tau = 0.0; tau <= 0.45 + 1e-12; tau += 0.05) {
    xs.push_back(tau);
    vs.push_back(binary_kl(0.5 + tau, 0.5));
  }
  auto env = lce_1d(xs, vs);
  for (size_t i = 0; i < xs.size(); ++i)
    CHECK(env(xs[i]).value() == doctest::Approx(vs[i].value()).epsilon(1e-9));
}

TEST_CASE("two points give the chord") {
  auto env = lce_1d({0.0, 2.0}, {ExtReal(1.0), ExtReal(3.0)});
  CHECK(env(1.0).value() == doctest::Approx(2.0));
  CHECK(env(-0.5).is_pos_inf());
  CHECK(env(2.5).is_pos_inf());
}

TEST_CASE("zig-zag hull matches the chord oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  std::vector<double> xs, ys;
  std::vector<ExtReal> vs;
  for (int i = 0; i < 25; ++i) {
    xs.push_back(0.2 * i);
    ys.push_back(u(rng));
    vs.push_back(ExtReal(ys.back()));
  }
  auto env = lce_1d(xs, vs);
  for (double q = 0.0; q <= 4.8 + 1e-9; q += 0.07) {
    double want = chord_oracle(xs, ys, q);
    CHECK(env(q).value() == doctest::Approx(want).epsilon(1e-9));
  }
  // envelope <= input, idempotent, midpoint convex
  std::vector<ExtReal> hv;
  for (double x : env.xs) hv.push_back(env(x));
  auto env2 = lce_1d(env.xs, hv);
  for (size_t i = 0; i < xs.size(); ++i) {
    CHECK(env(xs[i]).value() <= ys[i] + 1e-10);
    CHECK(env2(xs[i]).value() == doctest::Approx(env(xs[i]).value()).epsilon(1e-10));
  }
  for (size_t i = 0; i + 2 < xs.size(); ++i) {
    double mid = 0.5 * (env(xs[i]).value() + env(xs[i + 2]).value());
    CHECK(env(0.5 * (xs[i] + xs[i + 2])).value() <= mid + 1e-9);
  }
}

TEST_CASE("uce_1d mirrors lce_1d") {
  std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  std::vector<ExtReal> concave{ExtReal(0.0), ExtReal(2.0), ExtReal(2.8), ExtReal(3.0)};
  auto env = uce_1d(xs, concave);
  for (size_t i = 0; i < xs.size(); ++i)
    CHECK(env(xs[i]).value() == doctest::Approx(concave[i].value()).epsilon(1e-9));
  auto chord = uce_1d({0.0, 2.0}, {ExtReal(1.0), ExtReal(5.0)});
  CHECK(chord(1.0).value() == doctest::Approx(3.0));
}

TEST_CASE("infinite samples define the dom boundary") {
  std::vector<double> xs{0.0, 0.5, 1.0};
  std::vector<ExtReal> vs{ExtReal(0.0), ExtReal(1.0), ExtReal::pos_inf()};
  auto env = lce_1d(xs, vs);
  CHECK(env(0.5).value() == doctest::Approx(1.0));
  CHECK(env(0.9).is_pos_inf());
  auto deg = lce_1d({0.0}, {ExtReal(2.0)});
  CHECK(deg.degenerate);
}

TEST_CASE("gen_inverse") {
  PiecewiseLinear ident{{0.0, 1.0}, {0.0, 1.0}};
  CHECK(gen_inverse(ident, 0.4) == doctest::Approx(0.4));
  // Step: flat then jump; the inverse lands on the left endpoint of the jump.
  PiecewiseLinear step{{0.0, 1.0, 1.0 + 1e-12, 2.0}, {0.0, 0.0, 1.0, 1.0}};
  CHECK(gen_inverse(step, 0.5) == doctest::Approx(1.0));
  // phi_X for Bern(1/2)/Hamming inverted at alpha = D(3/4||1/2) -> 0.25.
  std::vector<double> xs;
  std::vector<ExtReal> vs;
  for (double tau = 0.0; tau <= 0.5 + 1e-12; tau += 1.0 / 512)
    xs.push_back(tau), vs.push_back(binary_kl(0.5 + tau, 0.5));
  auto phix = lce_1d(xs, vs);
  CHECK(gen_inverse(phix, binary_kl(0.75, 0.5).value()) == doctest::Approx(0.25).epsilon(1e-3));
}

TEST_CASE("2D envelope: plane reproduces itself") {
  ExponentCurve c;
  c.alpha_grid = {0.0, 0.5, 1.0};
  c.tau_grid = {0.0, 1.0};
  for (double a : c.alpha_grid) {
    std::vector<ExtReal> row;
    std::vector<std::string> tags;
    for (double t : c.tau_grid) {
      row.push_back(ExtReal(2.0 * a - t + 1.0));
      tags.push_back("plane");
    }
    c.values.push_back(row);
    c.method.push_back(tags);
  }
  Envelope2D env(c);
  CHECK(env.query(0.5, 0.5).value() == doctest::Approx(1.5).epsilon(1e-9));
  CHECK(env.query(0.25, 1.0).value() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(env.query(2.0, 0.0).is_pos_inf());  // outside the sampled dom
}

TEST_CASE("2D envelope: single finite row degenerates to 1D") {
  ExponentCurve c;
  c.alpha_grid = {0.0, 1.0};
  c.tau_grid = {0.0, 0.5, 1.0};
  c.values = {{ExtReal(0.0), ExtReal(0.4), ExtReal(2.0)},
              {ExtReal::pos_inf(), ExtReal::pos_inf(), ExtReal::pos_inf()}};
  Envelope2D env(c);
  auto line = lce_1d(c.tau_grid, c.values[0]);
  for (double t = 0.0; t <= 1.0 + 1e-9; t += 0.125)
    CHECK(env.query(0.0, t).value() == doctest::Approx(line(t).value()).epsilon(1e-9));
}

TEST_CASE("2D envelope equals the 3-point-mixture oracle on random grids") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    ExponentCurve c;
    for (int i = 0; i < 5; ++i) c.alpha_grid.push_back(0.25 * i);
    for (int j = 0; j < 5; ++j) c.tau_grid.push_back(0.2 * j);
    std::vector<std::array<double, 3>> pts;
    for (double a : c.alpha_grid) {
      std::vector<ExtReal> row;
      for (double t : c.tau_grid) {
        double v = u(rng);
        row.push_back(ExtReal(v));
        pts.push_back({a, t, v});
      }
      c.values.push_back(row);
    }
    Envelope2D env(c);
    for (double a : {0.0, 0.25, 0.5, 0.625, 1.0})
      for (double t : {0.0, 0.2, 0.3, 0.8}) {
        double want = mixture3_oracle(pts, a, t);
        CHECK(env.query(a, t).value() == doctest::Approx(want).epsilon(1e-8));
      }
    // pointwise domination + idempotence at the grid nodes
    ExponentCurve c2 = c;
    for (size_t i = 0; i < c.alpha_grid.size(); ++i)
      for (size_t j = 0; j < c.tau_grid.size(); ++j) {
        auto v = env.query(c.alpha_grid[i], c.tau_grid[j]);
        CHECK(v.value() <= c.values[i][j].value() + 1e-10);
        c2.values[i][j] = v;
      }
    Envelope2D env2(c2);
    for (double a : {0.1, 0.5, 0.9})
      for (double t : {0.1, 0.5})
        CHECK(env2.query(a, t).value() ==
              doctest::Approx(env.query(a, t).value()).epsilon(1e-8));
  }
}

TEST_CASE("all-infinite grid gives an empty dom") {
  ExponentCurve c;
  c.alpha_grid = {0.0, 1.0};
  c.tau_grid = {0.0, 1.0};
  c.values = {{ExtReal::pos_inf(), ExtReal::pos_inf()},
              {ExtReal::pos_inf(), ExtReal::pos_inf()}};
  Envelope2D env(c);
  CHECK(env.empty_dom());
  CHECK(env.query(0.5, 0.5).is_pos_inf());
}
