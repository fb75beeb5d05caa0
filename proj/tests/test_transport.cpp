#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "iso/divergence.hpp"
#include "iso/transport.hpp"

using namespace iso;

namespace {

Distribution random_dist(std::mt19937_64& rng, size_t m, bool allow_zeros = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(m);
  double s = 0.0;
  for (auto& x : v) {
    x = allow_zeros && u(rng) < 0.25 ? 0.0 : u(rng) + 1e-6;
    s += x;
  }
  if (s == 0.0) v[0] = s = 1.0;
  for (auto& x : v) x /= s;
  return Distribution(v);
}

CostMatrix random_cost(std::mt19937_64& rng, size_t m, size_t n) {
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<std::vector<double>> e(m, std::vector<double>(n));
  for (auto& row : e)
    for (auto& v : row) v = u(rng);
  return CostMatrix(e);
}

// 2x2 transport polytope has two vertices; enumerate both.
double vertex_oracle_2x2(const Distribution& qx, const Distribution& qy,
                         const CostMatrix& c) {
  double lo = std::max(0.0, qx[0] + qy[0] - 1.0);
  double hi = std::min(qx[0], qy[0]);
  auto eval = [&](double p) {
    return c(0, 0) * p + c(0, 1) * (qx[0] - p) + c(1, 0) * (qy[0] - p) +
           c(1, 1) * (1 - qx[0] - qy[0] + p);
  };
  return std::min(eval(lo), eval(hi));
}

}  // namespace

TEST_CASE("ot_cost basics") {
  auto c = CostMatrix::hamming(2);
  auto p = Distribution::bernoulli(0.5);
  auto [v0, pl0] = ot_cost(p, p, c);
  CHECK(v0 == doctest::Approx(0.0));
  CHECK(pl0.marginal_residual() <= 1e-10);

  CostMatrix c2({{0.0, 3.0}, {2.0, 0.0}});
  auto [v1, pl1] = ot_cost(Distribution::bernoulli(0.0), Distribution::bernoulli(1.0), c2);
  CHECK(v1 == doctest::Approx(3.0));

  auto [v2, pl2] = ot_cost(p, Distribution::bernoulli(0.75), c);
  CHECK(v2 == doctest::Approx(0.25));
  CHECK(v2 == doctest::Approx(vertex_oracle_2x2(p, Distribution::bernoulli(0.75), c)));
}

TEST_CASE("ot_dual basics") {
  auto c = CostMatrix::hamming(2);
  auto p = Distribution::bernoulli(0.5);
  auto [dv, pot] = ot_dual(p, Distribution::bernoulli(0.75), c);
  CHECK(dv == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(pot.feasibility_slack(c) >= -1e-11);
  CHECK(pot.f[0] == doctest::Approx(0.0));  // normalization
}

TEST_CASE("duality gap, marginals, monotone scaling on random instances") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    size_t m = 2 + trial % 5, n = 2 + (trial / 3) % 5;
    auto qx = random_dist(rng, m, true);
    auto qy = random_dist(rng, n, true);
    auto c = random_cost(rng, m, n);
    auto r = ot_solve(qx, qy, c);
    double dual = qx.mean(r.potentials.f) + qy.mean(r.potentials.g);
    CHECK(std::fabs(r.value - dual) <= 1e-8);
    CHECK(r.coupling.marginal_residual() <= 1e-10);
    CHECK(r.potentials.feasibility_slack(c) >= -1e-11);

    // LP homogeneity under cost scaling
    double s = 3.25;
    std::vector<std::vector<double>> scaled = c.entries();
    for (auto& row : scaled)
      for (auto& v : row) v *= s;
    double v2 = ot_value(qx, qy, CostMatrix(scaled));
    CHECK(std::fabs(v2 - s * r.value) <= 1e-10);
  }
}

TEST_CASE("W1/TV identity for Hamming cost") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 100; ++trial) {
    size_t m = 2 + trial % 5;
    auto qx = random_dist(rng, m, true);
    auto qy = random_dist(rng, m, true);
    auto c = CostMatrix::hamming(m);
    auto [v, plan] = ot_cost(qx, qy, c);
    CHECK(std::fabs(v - tv(qx, qy)) <= 1e-10);
    CHECK(std::fabs(ot_value(qx, qy, c) - tv(qx, qy)) <= 1e-10);
  }
}

TEST_CASE("2x2 fast path matches simplex") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    auto qx = random_dist(rng, 2, true);
    auto qy = random_dist(rng, 2, true);
    auto c = random_cost(rng, 2, 2);
    CHECK(std::fabs(ot_value(qx, qy, c) - ot_solve(qx, qy, c).value) <= 1e-12);
  }
}

TEST_CASE("chain rule direction on product instances") {
  // OT cost of an independent product instance equals the sum of the
  // per-coordinate costs.
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    size_t m = 2 + trial % 2, n = 2 + trial % 3;
    auto qx1 = random_dist(rng, m), qy1 = random_dist(rng, m);
    auto qx2 = random_dist(rng, n), qy2 = random_dist(rng, n);
    auto c1 = random_cost(rng, m, m), c2 = random_cost(rng, n, n);
    double v1 = ot_value(qx1, qy1, c1), v2 = ot_value(qx2, qy2, c2);

    std::vector<double> px(m * n), py(m * n);
    std::vector<std::vector<double>> cc(m * n, std::vector<double>(m * n));
    for (size_t a = 0; a < m; ++a)
      for (size_t b = 0; b < n; ++b) {
        px[a * n + b] = qx1[a] * qx2[b];
        py[a * n + b] = qy1[a] * qy2[b];
        for (size_t a2 = 0; a2 < m; ++a2)
          for (size_t b2 = 0; b2 < n; ++b2)
            cc[a * n + b][a2 * n + b2] = c1(a, a2) + c2(b, b2);
      }
    double vp = ot_value(Distribution(px), Distribution(py), CostMatrix(cc));
    CHECK(std::fabs(vp - (v1 + v2)) <= 1e-8);
  }
}

TEST_CASE("conditional_ot") {
  auto c = CostMatrix::hamming(2);
  Kernel kx({Distribution::bernoulli(0.5), Distribution::bernoulli(0.25)});
  Kernel ky({Distribution::bernoulli(0.75), Distribution::bernoulli(0.25)});
  CHECK(conditional_ot(kx, kx, Distribution::bernoulli(0.5), c) == doctest::Approx(0.0));
  CHECK(conditional_ot(kx, ky, Distribution::bernoulli(1.0), c) == doctest::Approx(0.0));
  CHECK(conditional_ot(kx, ky, Distribution::bernoulli(0.5), c) == doctest::Approx(0.125));
}

TEST_CASE("additive_cost") {
  auto c = CostMatrix::hamming(2);
  CHECK(additive_cost(c, {}, {}) == doctest::Approx(0.0));
  CHECK(additive_cost(c, {0, 1}, {0, 1}) == doctest::Approx(0.0));
  CHECK(additive_cost(c, {0, 0}, {1, 1}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(additive_cost(c, {0}, {0, 1}), dimension_error);
}

TEST_CASE("metric flag") {
  CHECK(CostMatrix::hamming(4).is_metric());
  CHECK_FALSE(CostMatrix({{0.0, 3.0}, {2.0, 0.0}}).is_metric());
  CHECK_FALSE(CostMatrix({{0.0, 5.0, 1.0}, {5.0, 0.0, 1.0}, {1.0, 1.0, 0.0}}).is_metric());
}
