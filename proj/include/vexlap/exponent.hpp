#pragma once

#include <string>
#include <vector>

#include "vexlap/errors.hpp"
#include "vexlap/numeric.hpp"

namespace vexlap {

/// Analytic exponent, parsed from config strings:
///   constant(c)     p = c
///   affine(a,b,c)   p = a + b*x + c*y
///   radial(a,b)     p = a + b*|x - x_c|, x_c the box center
struct ExponentDescriptor {
  enum class Kind { Constant, Affine, Radial };

  Kind kind = Kind::Constant;
  double a = 2.0, b = 0.0, c = 0.0;

  double eval(Vec2 p, const Box& box) const;

  static ExponentDescriptor parse(const std::string& text);
  std::string str() const;
};

/// A variable exponent sampled at the nodes of the uniform grid over a box,
/// with cached extremes.  Admissible fields satisfy 1 < p_- <= p_+ < inf;
/// construction rejects anything below 1 + 1e-6.
class ExponentField {
 public:
  static constexpr double min_admissible() { return 1.0 + 1e-6; }

  ExponentField(Box box, int resolution, std::vector<double> nodal_values);

  const Box& box() const { return box_; }
  int resolution() const { return res_; }
  /// Grid spacing.
  double h() const { return 1.0 / res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int node_count() const { return (nx_ + 1) * (ny_ + 1); }

  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }
  bool is_constant(double tol = 0.0) const { return p_plus_ - p_minus_ <= tol; }

  double at(int node) const { return values_[node]; }
  double at(int ix, int iy) const { return values_[iy * (nx_ + 1) + ix]; }
  Vec2 node_xy(int node) const;

  /// Piecewise linear interpolation on the right-isosceles triangulation of
  /// the grid; coordinates are clamped into the box first.
  double sample(Vec2 p) const;

  const std::vector<double>& values() const { return values_; }

 private:
  Box box_;
  int res_;
  int nx_, ny_;
  std::vector<double> values_;
  double p_minus_, p_plus_;
};

ExponentField make_exponent(const ExponentDescriptor& desc, Box box, int resolution);

/// Discrete sup of log(1/|x-y|)*|p(x)-p(y)| over node pairs with |x-y| < 1.
/// Pairs at distance >= 1 are excluded so the logarithm stays positive.
double log_holder_modulus(const ExponentField& p);

/// Nodewise conjugate exponent p/(p-1).
ExponentField conjugate(const ExponentField& p);

}  // namespace vexlap
