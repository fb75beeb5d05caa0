#pragma once

#include <array>
#include <string>
#include <vector>

#include "iso/extreal.hpp"

namespace iso {

// Piecewise-linear function on [xs.front(), xs.back()]; +inf outside.
struct PiecewiseLinear {
  std::vector<double> xs;
  std::vector<double> ys;
  bool degenerate = false;  // fewer than two finite samples

  ExtReal operator()(double x) const;
  double min_x() const { return xs.front(); }
  double max_x() const { return xs.back(); }
};

// Lower convex envelope of the finite samples; +inf samples mark the dom
// boundary and are excluded from the hull.
PiecewiseLinear lce_1d(const std::vector<double>& xs, const std::vector<ExtReal>& vs);

// Upper concave envelope (mirror of lce_1d).
PiecewiseLinear uce_1d(const std::vector<double>& xs, const std::vector<ExtReal>& vs);

// Right-continuous generalized inverse of a nondecreasing piecewise-linear f:
// inf{x >= 0 : f(x) >= alpha}, with f extended by +inf to the right of dom.
double gen_inverse(const PiecewiseLinear& f, double alpha);

// Sampled exponent surface over an (alpha, tau) grid.
struct ExponentCurve {
  std::vector<double> alpha_grid;
  std::vector<double> tau_grid;
  std::vector<std::vector<ExtReal>> values;        // [alpha][tau]
  std::vector<std::vector<std::string>> method;    // provenance tag per cell

  void validate() const;
};

// Lower convex envelope of the 3D point cloud {(alpha_i, tau_j, v_ij)}.
// Queries solve the 3-constraint mixture LP over the sampled cloud, which by
// Caratheodory equals the <=3-point-mixture minimum.
class Envelope2D {
 public:
  explicit Envelope2D(const ExponentCurve& curve);

  // +inf (dom tag) outside the convex hull of the finite cells.
  ExtReal query(double alpha, double tau) const;
  bool empty_dom() const { return pts_.empty(); }

 private:
  std::vector<std::array<double, 3>> pts_;  // (alpha, tau, value)
};

}  // namespace iso
