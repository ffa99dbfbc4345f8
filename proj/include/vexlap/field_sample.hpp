#pragma once

#include <vector>

#include "vexlap/numeric.hpp"

namespace vexlap {

/// Scalar values attached to quadrature points with positive weights.
/// `values` holds either a plain scalar field or the magnitude of a vector
/// field; for gradient samples the components are kept alongside.
struct FieldSample {
  std::vector<Vec2> points;
  std::vector<double> values;
  std::vector<double> weights;
  /// Gradient components when the sample came from a vector field.
  std::vector<double> vx, vy;
  /// Measure of the integration region (the weights must sum to it).
  double region_measure = 0.0;

  std::size_t size() const { return values.size(); }
  bool has_vectors() const { return !vx.empty(); }

  /// Checks sizes, weight positivity and the weight-sum invariant
  /// (relative tolerance 1e-10).  Returns false instead of throwing.
  bool validate() const;
};

}  // namespace vexlap
