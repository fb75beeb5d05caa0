#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "iso/cost.hpp"
#include "iso/distribution.hpp"
#include "iso/envelope.hpp"
#include "iso/extreal.hpp"

namespace iso {

// Search plumbing shared by all exponent solvers. Defaults are tuned for
// alphabets up to ~4; identical inputs always give identical outputs.
struct SearchConfig {
  double grid_step = 1.0 / 64;  // simplex mesh, must be in (0, 1/4]
  int multistarts = 8;
  int ccp_iters = 100;
  double tol = 1e-9;
  std::uint64_t seed = 1;
};

struct ExponentResult {
  ExtReal value;
  std::string method;  // "exact", "subset-exact", "grid+ccp", "ccp",
                       // "empty-feasible" / "dom" for +inf results
  std::optional<Distribution> witness_x;
  std::optional<Distribution> witness_y;
  bool coarse_warning = false;  // grid certification unavailable at this size
};

// inf D(Q_Y||P_Y) over D(Q_X||P_X) <= alpha and C(Q_X,Q_Y) >= tau.
// Hamming costs on <= 16 atoms are solved exactly by subset decomposition;
// otherwise outer Q_X search (grid + ball extreme points) with a
// convex-concave inner loop, grid-certified when both alphabets are <= 3.
ExponentResult phi_geq(double alpha, double tau, const Distribution& p_x,
                       const Distribution& p_y, const CostMatrix& c,
                       const SearchConfig& cfg = {});

// phi_geq with Q_X pinned to P_X: inf D(Q_Y||P_Y) over C(P_X,Q_Y) >= tau.
ExponentResult varphi(double tau, const Distribution& p_x, const Distribution& p_y,
                      const CostMatrix& c, const SearchConfig& cfg = {});

// varphi with p_y := p_x (square cost).
ExponentResult varphi_x(double tau, const Distribution& p_x, const CostMatrix& c,
                        const SearchConfig& cfg = {});

// sup C(P_X,Q) over the open ball D(Q||P_X) < alpha; alpha = 0 gives the
// -inf marker (empty strict ball). Values coincide with the closed ball for
// alpha > 0 by continuity.
ExtReal kappa_x(double alpha, const Distribution& p_x, const CostMatrix& c,
                const SearchConfig& cfg = {});

// inf lambda D(Q_X||P_X) + (1-lambda) D(Q_Y||P_Y) over C(Q_X,Q_Y) >= tau.
ExponentResult phi_lambda_geq(double tau, double lambda, const Distribution& p_x,
                              const Distribution& p_y, const CostMatrix& c,
                              const SearchConfig& cfg = {});

struct PsiResult {
  ExtReal value;  // certified lower estimate of the outer supremum
  std::string method;
  std::optional<Distribution> witness_w;  // Q_W over {0,1}
  std::optional<Kernel> witness_x;        // Q_{X|W}
  std::optional<Kernel> witness_y;        // inner-optimal Q_{Y|W}
};

// sup over |W|=2 mixtures (Q_W, Q_{X|W}) with conditional divergence <= alpha
// of the inner minimum of the conditional output divergence subject to a
// conditional transport budget tau. Returns a lower estimate with witness.
PsiResult psi(double alpha, double tau, const Distribution& p_x,
              const Distribution& p_y, const CostMatrix& c,
              const SearchConfig& cfg = {});

// Transport-entropy comparison bound: phi_x_env((tau^{1/p} - kap^{1/p})^p)
// where kap is the concave-envelope value of kappa at alpha, clamped so the
// base never goes negative; nonpositive or out-of-range kap contributes 0.
ExtReal gl_bound(double alpha, double tau, double pexp,
                 const PiecewiseLinear& phi_x_env,
                 const PiecewiseLinear& kappa_upper_env);

// Clamped Gaussian-style comparison: max(tau^{1/p}/sqrt(gamma) - sqrt(alpha), 0)^2.
double gaussian_bound(double alpha, double tau, double gamma, double pexp);

// Worst-case binary curve L(tau) = min_{p in [0,1-tau]} binary_kl(p, p+tau).
// L(0) = 0, L(1) = +inf. Domain error outside [0,1].
ExtReal hamming_L(double tau);

// Generalized inverse inf{tau in [0,1] : L(tau) >= alpha}.
double hamming_L_inverse(double alpha);

// Composite lower bound L([tau - L^{-1}(alpha)]^+).
ExtReal hamming_phi_lb(double alpha, double tau);

// Enumerate the step-delta simplex grid over m atoms (count compositions of
// round(1/delta)); shared by solvers and test oracles.
std::vector<Distribution> simplex_grid(size_t m, double delta);

}  // namespace iso
