#pragma once

#include <optional>
#include <vector>

#include "iso/distribution.hpp"
#include "iso/extreal.hpp"

namespace iso {

// log(sum_i w_i * e^{a_i}) with max-shift; w_i >= 0, not all zero.
double log_sum_exp(const std::vector<double>& a, const std::vector<double>& w);

// D(q||p) = sum q_i ln(q_i/p_i), natural log, 0 ln 0 = 0.
// +inf iff some q_i > 0 has p_i = 0.
ExtReal kl(const Distribution& q, const Distribution& p);

// sum_w w(w) D(q_w || p); +inf propagates.
ExtReal conditional_kl(const Kernel& q, const Distribution& p, const Distribution& w);

// Per-row reference version: sum_w w(w) D(q_w || p_w).
ExtReal conditional_kl(const Kernel& q, const Kernel& p, const Distribution& w);

// Total variation (1/2) sum |q_i - p_i|.
double tv(const Distribution& q, const Distribution& p);

// Binary relative entropy p ln(p/q) + (1-p) ln((1-p)/(1-q)), p,q in [0,1].
ExtReal binary_kl(double p, double q);

// Binary entropy -p ln p - (1-p) ln(1-p).
double binary_entropy(double p);

// Exponential tilting: Q(i) = p_i e^{lambda f_i} / Z, log-sum-exp stabilized.
Distribution tilt(const Distribution& p, const std::vector<double>& f, double lambda);

// Renyi divergence of order 0: -ln p(supp q).
ExtReal renyi0(const Distribution& q, const Distribution& p);

struct IProjResult {
  ExtReal value;
  std::optional<Distribution> minimizer;  // empty iff value is +inf
  double lambda = 0.0;
};

// inf_{Q: Q(f) >= tau} D(Q||P) = sup_{lambda>=0} lambda tau - log P(e^{lambda f}).
// The minimizer is the tilted Q_{lambda*}; tau > max f over supp(p) gives +inf.
IProjResult iproj_halfspace(const Distribution& p, const std::vector<double>& f,
                            double tau);

// sup_{Q: D(Q||P) <= alpha} Q(f) = inf_{eta>0} eta alpha + eta log P(e^{f/eta}).
double kl_ball_max_mean(const Distribution& p, const std::vector<double>& f,
                        double alpha);

struct KlBallMaxResult {
  double value;
  Distribution maximizer;
  double eta;
};

// Same as kl_ball_max_mean but also reports the optimizing tilt.
KlBallMaxResult kl_ball_max_mean_arg(const Distribution& p,
                                     const std::vector<double>& f, double alpha);

}  // namespace iso
