#pragma once

#include <random>
#include <vector>

#include "vexlap/exponent.hpp"
#include "vexlap/lebesgue.hpp"
#include "vexlap/mesh.hpp"

namespace vexlap::testing {

inline ExponentField constant_exponent(double c, Box box = unit_box(), int res = 16) {
  return make_exponent({ExponentDescriptor::Kind::Constant, c, 0, 0}, box, res);
}

inline ExponentField affine_exponent(double a, double b, double c,
                                     Box box = unit_box(), int res = 16) {
  return make_exponent({ExponentDescriptor::Kind::Affine, a, b, c}, box, res);
}

/// Random nodal field with values bounded away from zero, signs mixed.
inline GridFunction random_field(const Mesh& mesh, std::mt19937_64& rng,
                                 double lo = 0.2, double hi = 2.0) {
  std::uniform_real_distribution<double> mag(lo, hi);
  std::bernoulli_distribution sign(0.5);
  GridFunction u(mesh);
  for (int n = 0; n < mesh.node_count(); ++n)
    u[n] = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return u;
}

/// Random admissible exponent samples in [lo, hi].
inline ExponentField random_exponent(Box box, int res, std::mt19937_64& rng,
                                     double lo = 1.3, double hi = 3.5) {
  std::uniform_real_distribution<double> uni(lo, hi);
  int nx = static_cast<int>(std::llround(box.width() * res));
  int ny = static_cast<int>(std::llround(box.height() * res));
  std::vector<double> v(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (double& x : v) x = uni(rng);
  return {box, res, std::move(v)};
}

}  // namespace vexlap::testing
