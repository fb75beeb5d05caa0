#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iso/cost.hpp"
#include "iso/distribution.hpp"
#include "iso/exponents.hpp"
#include "iso/extreal.hpp"

namespace iso {

// Finite metric probability space (points, distances, base measure).
// Lipschitz-polytope vertices are enumerated lazily and cached: spaces with
// <= 6 points get the complete vertex set (spanning trees x edge signs),
// larger spaces a heuristic candidate family tagged as such.
class MetricSpace {
 public:
  MetricSpace(CostMatrix dist, Distribution base);

  const CostMatrix& dist() const { return d_; }
  const Distribution& base() const { return p_; }
  size_t size() const { return p_.size(); }

  // Vertices (or heuristic candidates) of {f : |f_i - f_j| <= d_ij, P(f)=0}.
  const std::vector<std::vector<double>>& lipschitz_vertices() const;
  bool vertices_exact() const;

 private:
  CostMatrix d_;
  Distribution p_;
  mutable std::vector<std::vector<double>> verts_;
  mutable bool built_ = false;
  mutable bool exact_ = true;
};

// 1-Lipschitz mean-zero vector on a metric space; throws when the slope or
// recentering invariants fail beyond 1e-11.
struct LipschitzVector {
  std::vector<double> f;
  LipschitzVector(std::vector<double> values, const MetricSpace& g);
};

struct DualCertificate {
  std::vector<double> f;
  std::vector<double> g;
  double lambda = 0.0;
  double eta = 0.0;
};

struct DualResult {
  ExtReal value;
  DualCertificate cert;
  std::string method;
  bool concavity_fallback = false;  // inner midpoint test tripped a grid rerun
};

// Potential-space dual of phi_geq: inf over f (g = c-transform) of the
// concave inner supremum over (lambda, eta). Every evaluated pair is a valid
// upper bound; the best found is returned with its certificate.
DualResult dual_phi_geq(double alpha, double tau, const Distribution& p_x,
                        const Distribution& p_y, const CostMatrix& c,
                        const SearchConfig& cfg = {});

// alpha = 0 specialization: inner 1D supremum (an I-projection value).
DualResult dual_varphi_geq(double tau, const Distribution& p_x,
                           const Distribution& p_y, const CostMatrix& c,
                           const SearchConfig& cfg = {});

// Lipschitz dual of varphi_x on a metric space: inf over 1-Lipschitz
// mean-zero f of sup_lambda lambda tau - log P(e^{lambda f}).
DualResult dual_varphi_x(double tau, const MetricSpace& g,
                         const SearchConfig& cfg = {});

// Exact subset route to varphi_x on a metric space: W1 is the max of
// P(v) - Q(v) over polytope vertices v, so the primal splits into one
// half-space I-projection per vertex. Exact when vertices_exact().
ExtReal varphi_x_vertex(double tau, const MetricSpace& g);

// Maximal log moment value over the 1-Lipschitz mean-zero class.
double abs_LG(double lambda, const MetricSpace& g);

// Legendre transform r(tau) = sup_{lambda >= 0} lambda tau - L_G(lambda);
// ties resolved toward the smallest lambda.
double abs_r(double tau, const MetricSpace& g);

struct EquivalenceReport {
  double max_gap = 0.0;
  double arg_tau = 0.0;
  std::vector<double> taus;
  std::vector<double> envelope_vals;  // convex envelope of varphi_x samples
  std::vector<double> r_vals;
  bool exact_vertices = true;
};

// Compare the envelope of varphi_x samples against r on a tau grid.
EquivalenceReport check_equivalence(const MetricSpace& g,
                                    const std::vector<double>& tau_grid,
                                    const SearchConfig& cfg = {});

struct PotentialPair {
  std::vector<double> f;
  std::vector<double> g;
};

struct PsiDualCandidate {
  PotentialPair w0, w1;
};

struct PsiDualResult {
  ExtReal value;  // valid lower evidence for the psi dual value
  PsiDualCandidate best;
  double lambda = 0.0;
  double eta = 0.0;
};

// Two-branch potential dual of psi: evaluates each candidate exactly (inner
// 1D convex minimization over eta, explicit max over branches), plus a
// binary-alphabet slope-grid family; returns the best candidate.
PsiDualResult dual_psi(double alpha, double tau, const Distribution& p_x,
                       const Distribution& p_y, const CostMatrix& c,
                       const std::vector<PsiDualCandidate>& candidates);

// Harvest dual candidates from a primal psi witness via transport potentials.
std::vector<PsiDualCandidate> psi_dual_candidates(const PsiResult& primal,
                                                  const CostMatrix& c);

}  // namespace iso
