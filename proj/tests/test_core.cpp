#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "iso/divergence.hpp"

using namespace iso;

namespace {

Distribution random_dist(std::mt19937_64& rng, size_t m, bool allow_zeros = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(m);
  double s = 0.0;
  for (auto& x : v) {
    x = allow_zeros && u(rng) < 0.2 ? 0.0 : u(rng) + 1e-6;
    s += x;
  }
  if (s == 0.0) v[0] = s = 1.0;
  for (auto& x : v) x /= s;
  return Distribution(v);
}

// kl(Bern(3/4) || Bern(1/2)) by direct summation.
const double kKl34 = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);

}  // namespace

TEST_CASE("kl basics") {
  auto p = Distribution::bernoulli(0.5);
  CHECK(kl(p, p).value() == doctest::Approx(0.0));
  CHECK(kl(Distribution::bernoulli(1.0), p).value() == doctest::Approx(std::log(2.0)));
  CHECK(kl(Distribution::bernoulli(0.75), p).value() == doctest::Approx(kKl34).epsilon(1e-9));
  CHECK(kKl34 == doctest::Approx(0.130812).epsilon(1e-5));
  CHECK(kl(p, Distribution::bernoulli(1.0)).is_pos_inf());
  CHECK_THROWS_AS(kl(p, Distribution::uniform(3)), dimension_error);
}

TEST_CASE("conditional_kl") {
  auto p = Distribution::bernoulli(0.5);
  Kernel rows({Distribution::bernoulli(0.75), Distribution::bernoulli(0.25)});
  Kernel same({p, p});
  CHECK(conditional_kl(same, p, Distribution::bernoulli(0.5)).value() == doctest::Approx(0.0));
  // degenerate weight picks out one row
  CHECK(conditional_kl(rows, p, Distribution::bernoulli(0.0)).value() ==
        doctest::Approx(kl(rows.row(0), p).value()));
  CHECK(conditional_kl(rows, p, Distribution::bernoulli(0.5)).value() ==
        doctest::Approx(kKl34).epsilon(1e-9));
}

TEST_CASE("tv") {
  auto p = Distribution::bernoulli(0.5);
  CHECK(tv(p, p) == doctest::Approx(0.0));
  CHECK(tv(Distribution::bernoulli(1.0), Distribution::bernoulli(0.0)) == doctest::Approx(1.0));
  CHECK(tv(Distribution::bernoulli(0.75), p) == doctest::Approx(0.25));
}

TEST_CASE("binary_kl") {
  CHECK(binary_kl(0.3, 0.3).value() == doctest::Approx(0.0));
  CHECK(binary_kl(1.0, 0.5).value() == doctest::Approx(std::log(2.0)));
  CHECK(binary_kl(0.75, 0.5).value() == doctest::Approx(kKl34).epsilon(1e-9));
  CHECK(binary_kl(0.5, 0.0).is_pos_inf());
  CHECK_THROWS_AS(binary_kl(-0.1, 0.5), std::domain_error);
}

TEST_CASE("tilt") {
  auto p = Distribution::bernoulli(0.5);
  std::vector<double> f{0.0, 1.0};
  CHECK(tv(tilt(p, f, 0.0), p) == doctest::Approx(0.0));
  CHECK(tv(tilt(p, {3.0, 3.0}, 1.7), p) == doctest::Approx(0.0));
  auto q = tilt(p, f, std::log(3.0));
  CHECK(q[1] == doctest::Approx(0.75));
}

TEST_CASE("renyi0") {
  auto p = Distribution::bernoulli(0.5);
  CHECK(renyi0(p, p).value() == doctest::Approx(0.0));
  CHECK(renyi0(Distribution::bernoulli(1.0), p).value() == doctest::Approx(std::log(2.0)));
  CHECK(renyi0(p, Distribution::bernoulli(0.75)).value() == doctest::Approx(0.0));
}

TEST_CASE("iproj_halfspace examples") {
  auto p = Distribution::bernoulli(0.5);
  std::vector<double> f{0.0, 1.0};

  auto r0 = iproj_halfspace(p, f, 0.3);
  CHECK(r0.value.value() == doctest::Approx(0.0));

  auto r = iproj_halfspace(p, f, 0.75);
  CHECK(r.value.value() == doctest::Approx(kKl34).epsilon(1e-8));
  CHECK(r.minimizer->operator[](1) == doctest::Approx(0.75).epsilon(1e-8));
  CHECK(r.lambda == doctest::Approx(std::log(3.0)).epsilon(1e-6));

  // tau at max f on a single atom: forced point mass
  auto rb = iproj_halfspace(p, f, 1.0);
  CHECK(rb.value.value() == doctest::Approx(std::log(2.0)));

  CHECK(iproj_halfspace(p, f, 1.5).value.is_pos_inf());
}

TEST_CASE("iproj vs binary grid oracle") {
  // 1e-6-step grid over q of binary_kl(q || 1/2) subject to q >= 0.75
  double best = 1e18;
  for (double q = 0.75; q <= 1.0 + 1e-12; q += 1e-6)
    best = std::min(best, binary_kl(std::min(q, 1.0), 0.5).value());
  auto r = iproj_halfspace(Distribution::bernoulli(0.5), {0.0, 1.0}, 0.75);
  CHECK(r.value.value() == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("kl_ball_max_mean") {
  auto p = Distribution::bernoulli(0.5);
  std::vector<double> f{0.0, 1.0};
  CHECK(kl_ball_max_mean(p, f, 0.0) == doctest::Approx(0.5));
  CHECK(kl_ball_max_mean(p, f, 10.0) == doctest::Approx(1.0));
  CHECK(kl_ball_max_mean(p, f, kKl34) == doctest::Approx(0.75).epsilon(1e-6));
}

TEST_CASE("nonnegativity and pinsker over random draws") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    size_t m = 2 + trial % 7;
    auto q = random_dist(rng, m, true);
    auto p = random_dist(rng, m);
    ExtReal d = kl(q, p);
    REQUIRE(d.is_finite());
    CHECK(d.value() >= 0.0);
    double maxdiff = 0.0;
    for (size_t i = 0; i < m; ++i) maxdiff = std::max(maxdiff, std::fabs(q[i] - p[i]));
    if (d.value() <= 1e-13) CHECK(maxdiff <= 1e-6);
    if (maxdiff <= 1e-12) CHECK(d.value() <= 1e-10);
    // Pinsker
    CHECK(tv(q, p) <= std::sqrt(2.0 * d.value()) + 1e-12);
    // Renyi-0 lower bound
    CHECK(renyi0(q, p).value() <= d.value() + 1e-12);
  }
}

TEST_CASE("tilting identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uf(-2.0, 2.0), ul(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    size_t m = 2 + trial % 5;
    auto q = random_dist(rng, m);
    auto p = random_dist(rng, m);
    std::vector<double> f(m);
    for (auto& x : f) x = uf(rng);
    double lambda = ul(rng);
    auto t = tilt(p, f, lambda);
    double lhs = kl(q, p).value() - kl(t, p).value();
    double rhs = kl(q, t).value() + lambda * (q.mean(f) - t.mean(f));
    CHECK(std::fabs(lhs - rhs) <= 1e-10);
  }
}

TEST_CASE("iproj duality vs simplex grid primal") {
  // Coarse simplex grid primal on alphabets <= 4; agreement within the grid
  // modulus lambda* delta |f|_inf + 1e-6.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> uf(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    size_t m = 2 + trial % 3;
    auto p = random_dist(rng, m);
    std::vector<double> f(m);
    for (auto& x : f) x = uf(rng);
    double fmax = *std::max_element(f.begin(), f.end());
    double tau = p.mean(f) + 0.6 * (fmax - p.mean(f));
    auto r = iproj_halfspace(p, f, tau);
    REQUIRE(r.value.is_finite());

    const int grid = m == 2 ? 10000 : (m == 3 ? 400 : 100);
    const double delta = 1.0 / grid;
    double primal = 1e18;
    std::vector<int> k(m, 0);
    // enumerate compositions of `grid` into m parts
    std::vector<int> idx(m - 1, 0);
    std::function<void(size_t, int)> rec = [&](size_t pos, int rem) {
      if (pos == m - 1) {
        std::vector<double> mass(m);
        for (size_t i = 0; i < m - 1; ++i) mass[i] = double(idx[i]) / grid;
        mass[m - 1] = double(rem) / grid;
        Distribution q(mass);
        if (q.mean(f) >= tau) primal = std::min(primal, kl(q, p).value());
        return;
      }
      for (int c = 0; c <= rem; ++c) {
        idx[pos] = c;
        rec(pos + 1, rem - c);
      }
    };
    rec(0, grid);
    double fabsmax = 0.0;
    for (double x : f) fabsmax = std::max(fabsmax, std::fabs(x));
    double modulus = r.lambda * delta * fabsmax * m + 1e-6;
    CHECK(primal >= r.value.value() - 1e-9);
    CHECK(primal - r.value.value() <= modulus);
  }
}

TEST_CASE("distribution construction rules") {
  CHECK_THROWS(Distribution({0.5, 0.4}));                 // sums to 0.9
  CHECK_NOTHROW(Distribution({0.5, 0.5 + 5e-10}));        // normalizes
  CHECK_THROWS(Distribution({{"a", "a"}, {0.5, 0.5}}));   // duplicate labels
  CHECK_THROWS(Distribution({-0.1, 1.1}));                // negative mass
}
