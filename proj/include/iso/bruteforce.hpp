#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iso/cost.hpp"
#include "iso/distribution.hpp"
#include "iso/envelope.hpp"
#include "iso/extreal.hpp"

namespace iso {

// Subset of the lexicographically enumerated product space (first letter most
// significant); guarded to alphabet^n <= 2^25 bits.
struct SubsetMask {
  size_t n = 0;
  size_t alphabet = 0;
  std::vector<bool> points;

  static SubsetMask empty(size_t n, size_t alphabet);
  size_t count() const;
  bool includes(const SubsetMask& other) const;  // other subseteq this
};

// alphabet^n with the 2^25 construction guard.
size_t product_size(size_t alphabet, size_t n);

// Lexicographic unranking of a product point.
std::vector<size_t> unrank_point(size_t idx, size_t n, size_t alphabet);

// P^{\otimes n}(A).
double product_mass(const SubsetMask& a, const Distribution& p);

// {y^n : exists x^n in A with sum_i c(x_i, y_i) <= t}, 1e-12 slack.
SubsetMask enlarge(const SubsetMask& a, double t, const CostMatrix& c);

struct GammaResult {
  double value;
  SubsetMask witness;
  std::string method;  // "exhaustive" or "sampled"
};

// min over A with P_X(A) >= a of P_Y(A^t). Full 2^K subset scan for K <= 16
// product points; 17..25 points use seeded random subsets plus singletons,
// complements, and exchangeable masks, tagged "sampled".
GammaResult gamma_exhaustive(size_t n, double a, double t, const Distribution& p_x,
                             const Distribution& p_y, const CostMatrix& c,
                             std::uint64_t seed = 1);

// Exchangeable set as a family of n-types (count vectors).
struct TypeSet {
  size_t n = 0;
  std::vector<std::vector<int>> types;
};

struct GammaTypeResult {
  double value;  // upper bound on Gamma (any family is feasible)
  TypeSet witness;
};

// Search over exchangeable families: mass-greedy plus divergence-ball
// orderings around tilted centers. Membership of a y-type in the enlargement
// is decided exactly through the scaled transport cost between types.
GammaTypeResult gamma_exchangeable(size_t n, double a, double t,
                                   const Distribution& p_x,
                                   const Distribution& p_y, const CostMatrix& c);

struct GammaLevelsResult {
  double value;          // Gamma restricted to weight bands
  double log_one_minus;  // log(1 - Gamma), -inf when the enlargement is full
  int band_lo = 0, band_hi = 0;
};

// Binary/Hamming specialization: all contiguous weight bands (lower sets
// included) with mass >= a; the enlargement of [w1, w2] is the clamped band
// [w1 - floor(t), w2 + floor(t)]. Log-domain binomial masses throughout.
GammaLevelsResult gamma_levels(size_t n, double a, double t, double p);

struct ExponentPair {
  ExtReal e0, e1;
};

// E0 = -(1/n) ln Gamma, E1 = -(1/n) ln(1 - Gamma); optional log-domain inputs
// take precedence for tail accuracy.
ExponentPair exponents_E(size_t n, double gamma,
                         std::optional<double> log_gamma = std::nullopt,
                         std::optional<double> log_one_minus = std::nullopt);

struct TalagrandReport {
  double worst_slack = 0.0;  // min over (A, lambda) of -n*env - log LHS
  double witness_lambda = 0.0;
  SubsetMask witness;
  size_t checked = 0;
};

// Two-factor concentration sweep at t = n*tau: for every subset A and every
// lambda, log[P_Y((A^t)^c)^{1-lambda} P_X(A)^lambda] <= -n * env(lambda),
// with 0^0 = 1. env supplies the convex-envelope exponent per lambda.
TalagrandReport talagrand_sweep(size_t n, const std::vector<double>& lambda_grid,
                                double tau, const Distribution& p_x,
                                const Distribution& p_y, const CostMatrix& c,
                                const std::function<ExtReal(double)>& env);

struct DimensionFreeReport {
  size_t violations = 0;
  double worst_margin = 0.0;  // min over checked rows of E1 - bound
  size_t vacuous = 0;         // enlargement covers the full space
  size_t dom_skipped = 0;     // envelope query outside its domain
  size_t checked = 0;
  double witness_alpha = 0.0, witness_tau = 0.0;
};

// Product-space check of E1 >= envelope: every subset A gives a row
// (alpha_A, t/n); the envelope is queried one tau step down (the safe
// direction for sampled envelopes) and rows must clear it within tol.
DimensionFreeReport dimension_free_check(size_t n, const std::vector<double>& tau_grid,
                                         const Distribution& p_x,
                                         const Distribution& p_y, const CostMatrix& c,
                                         const Envelope2D& envelope, double tau_step,
                                         double tol = 1e-3,
                                         std::uint64_t seed = 1);

struct StrassenResult {
  double lp_value;   // min coupling P{c_n > t}
  double set_value;  // sup_A P_X(A) - P_Y(A^t)
  double gap;        // lp_value - set_value
};

// Both sides of the excess-cost duality on the product space.
StrassenResult strassen_gt(size_t n, double t, const Distribution& p_x,
                           const Distribution& p_y, const CostMatrix& c);

struct ConvergenceRow {
  size_t n;
  double gamma;
  ExtReal e0, e1;
  std::string method;  // "exhaustive", "levels", "types", "skipped"
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double envelope_ref = 0.0;  // caller-supplied limit candidates, recorded
  double legendre_ref = 0.0;
};

// Finite-n trend table at fixed (a, tau): exhaustive where possible, level or
// type candidates beyond. Purely reporting; no limit is asserted.
ConvergenceTable convergence_report(const std::vector<size_t>& n_list, double tau,
                                    double a, const Distribution& p_x,
                                    const Distribution& p_y, const CostMatrix& c,
                                    double envelope_ref, double legendre_ref);

}  // namespace iso
