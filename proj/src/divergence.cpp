#include "iso/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iso {

double log_sum_exp(const std::vector<double>& a, const std::vector<double>& w) {
  if (a.size() != w.size()) throw dimension_error("log_sum_exp: size mismatch");
  double m = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < a.size(); ++i)
    if (w[i] > 0.0) m = std::max(m, a[i]);
  if (!std::isfinite(m)) throw std::invalid_argument("log_sum_exp: empty support");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    if (w[i] > 0.0) s += w[i] * std::exp(a[i] - m);
  return m + std::log(s);
}

ExtReal kl(const Distribution& q, const Distribution& p) {
  if (!q.same_alphabet(p)) throw dimension_error("kl: alphabet mismatch");
  double s = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= 0.0) continue;
    if (p[i] <= 0.0) return ExtReal::pos_inf();
    s += q[i] * std::log(q[i] / p[i]);
  }
  return ExtReal(std::max(s, 0.0));
}

ExtReal conditional_kl(const Kernel& q, const Distribution& p, const Distribution& w) {
  if (w.size() > q.num_rows())
    throw dimension_error("conditional_kl: weight support exceeds kernel rows");
  ExtReal s(0.0);
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    s = s + kl(q.row(i), p).scaled(w[i]);
  }
  return s;
}

ExtReal conditional_kl(const Kernel& q, const Kernel& p, const Distribution& w) {
  if (w.size() > q.num_rows() || q.num_rows() != p.num_rows())
    throw dimension_error("conditional_kl: row count mismatch");
  ExtReal s(0.0);
  for (size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    s = s + kl(q.row(i), p.row(i)).scaled(w[i]);
  }
  return s;
}

double tv(const Distribution& q, const Distribution& p) {
  if (!q.same_alphabet(p)) throw dimension_error("tv: alphabet mismatch");
  double s = 0.0;
  for (size_t i = 0; i < q.size(); ++i) s += std::fabs(q[i] - p[i]);
  return 0.5 * s;
}

ExtReal binary_kl(double p, double q) {
  // Absorb float-accumulation overshoot, matching the Distribution
  // normalization tolerance; anything larger is a genuine domain error.
  if (!(p >= -1e-9 && p <= 1.0 + 1e-9 && q >= -1e-9 && q <= 1.0 + 1e-9))
    throw std::domain_error("binary_kl: arguments outside [0,1]");
  p = std::clamp(p, 0.0, 1.0);
  q = std::clamp(q, 0.0, 1.0);
  double s = 0.0;
  if (p > 0.0) {
    if (q <= 0.0) return ExtReal::pos_inf();
    s += p * std::log(p / q);
  }
  if (p < 1.0) {
    if (q >= 1.0) return ExtReal::pos_inf();
    s += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  }
  return ExtReal(std::max(s, 0.0));
}

double binary_entropy(double p) {
  double s = 0.0;
  if (p > 0.0) s -= p * std::log(p);
  if (p < 1.0) s -= (1.0 - p) * std::log(1.0 - p);
  return s;
}

Distribution tilt(const Distribution& p, const std::vector<double>& f, double lambda) {
  if (f.size() != p.size()) throw dimension_error("tilt: size mismatch");
  double m = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) m = std::max(m, lambda * f[i]);
  std::vector<double> q(p.size(), 0.0);
  double z = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      q[i] = p[i] * std::exp(lambda * f[i] - m);
      z += q[i];
    }
  }
  for (double& x : q) x /= z;
  return Distribution(p.labels(), std::move(q));
}

ExtReal renyi0(const Distribution& q, const Distribution& p) {
  if (!q.same_alphabet(p)) throw dimension_error("renyi0: alphabet mismatch");
  double mass = 0.0;
  for (size_t i = 0; i < q.size(); ++i)
    if (q[i] > 0.0) mass += p[i];
  if (mass <= 0.0) return ExtReal::pos_inf();
  return ExtReal(std::max(-std::log(mass), 0.0));
}

namespace {

// log P(e^{lambda f}) restricted to supp(p).
double log_mgf(const Distribution& p, const std::vector<double>& f, double lambda) {
  std::vector<double> a(f.size());
  for (size_t i = 0; i < f.size(); ++i) a[i] = lambda * f[i];
  return log_sum_exp(a, p.mass());
}

// Conditional of p on {i: f_i >= fmax - eps}.
Distribution argmax_conditional(const Distribution& p, const std::vector<double>& f,
                                double fmax) {
  std::vector<double> q(p.size(), 0.0);
  double z = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0 && f[i] >= fmax - 1e-12) {
      q[i] = p[i];
      z += p[i];
    }
  for (double& x : q) x /= z;
  return Distribution(p.labels(), std::move(q));
}

}  // namespace

IProjResult iproj_halfspace(const Distribution& p, const std::vector<double>& f,
                            double tau) {
  if (f.size() != p.size()) throw dimension_error("iproj_halfspace: size mismatch");
  double fmax = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) fmax = std::max(fmax, f[i]);

  if (tau > fmax + 1e-12) return {ExtReal::pos_inf(), std::nullopt, 0.0};

  double pf = p.mean(f);
  if (tau <= pf) return {ExtReal(0.0), p, 0.0};

  if (tau >= fmax - 1e-12) {
    Distribution q = argmax_conditional(p, f, fmax);
    return {kl(q, p), q, std::numeric_limits<double>::max()};
  }

  // Q_lambda(f) is increasing in lambda; bracket then bisect on the derivative.
  double lo = 0.0, hi = 1.0;
  while (tilt(p, f, hi).mean(f) < tau) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) {  // numerically at the fmax boundary
      Distribution q = argmax_conditional(p, f, fmax);
      return {kl(q, p), q, hi};
    }
  }
  double lambda = hi;
  for (int it = 0; it < 200; ++it) {
    lambda = 0.5 * (lo + hi);
    double qf = tilt(p, f, lambda).mean(f);
    if (std::fabs(qf - tau) <= 1e-10) break;
    (qf < tau ? lo : hi) = lambda;
  }
  Distribution q = tilt(p, f, lambda);
  double value = std::max(lambda * tau - log_mgf(p, f, lambda), 0.0);
  return {ExtReal(value), q, lambda};
}

KlBallMaxResult kl_ball_max_mean_arg(const Distribution& p,
                                     const std::vector<double>& f, double alpha) {
  if (f.size() != p.size()) throw dimension_error("kl_ball_max_mean: size mismatch");
  if (alpha < 0.0) throw std::domain_error("kl_ball_max_mean: alpha < 0");
  if (alpha == 0.0) return {p.mean(f), p, std::numeric_limits<double>::max()};

  double fmax = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) fmax = std::max(fmax, f[i]);
  double mass_top = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0 && f[i] >= fmax - 1e-12) mass_top += p[i];
  if (alpha >= -std::log(mass_top)) {
    Distribution q = argmax_conditional(p, f, fmax);
    return {fmax, q, 0.0};
  }

  // h(eta) = eta alpha + eta log P(e^{f/eta}) is convex in eta; golden section
  // on log eta.
  auto h = [&](double t) {
    double eta = std::exp(t);
    return eta * alpha + eta * log_mgf(p, f, 1.0 / eta);
  };
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = std::log(1e-8), b = std::log(1e8);
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double h1 = h(x1), h2 = h(x2);
  for (int it = 0; it < 200; ++it) {
    if (h1 <= h2) {
      b = x2; x2 = x1; h2 = h1;
      x1 = b - gr * (b - a); h1 = h(x1);
    } else {
      a = x1; x1 = x2; h1 = h2;
      x2 = a + gr * (b - a); h2 = h(x2);
    }
  }
  double eta = std::exp(0.5 * (a + b));
  return {h(0.5 * (a + b)), tilt(p, f, 1.0 / eta), eta};
}

double kl_ball_max_mean(const Distribution& p, const std::vector<double>& f,
                        double alpha) {
  return kl_ball_max_mean_arg(p, f, alpha).value;
}

}  // namespace iso
