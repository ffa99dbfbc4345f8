#pragma once

#include "vexlap/exponent.hpp"
#include "vexlap/field_sample.hpp"

namespace vexlap {

/// Exponent values interpolated at the points of a sample.
std::vector<double> exponent_at(const ExponentField& p, const FieldSample& f);

/// The modular rho(f) = sum_k w_k |f_k|^{p(x_k)}.
double modular(const FieldSample& f, const ExponentField& p);

/// Same with exponent values already interpolated at the sample points.
double modular(const FieldSample& f, const std::vector<double>& p_at_points);

/// Luxemburg norm: the lambda solving rho(f/lambda) = 1, by monotone
/// bisection on the bracket [rho^{1/p-}, rho^{1/p+}] (in either order).
/// Returns 0 for the zero field.  Relative tolerance 1e-12.
double luxemburg_norm(const FieldSample& f, const ExponentField& p);

struct SandwichReport {
  double norm = 0.0;
  double mod = 0.0;
  double lower = 0.0;  // min(norm^p-, norm^p+)
  double upper = 0.0;  // max(norm^p-, norm^p+)
  double margin_lower = 0.0;  // mod - lower
  double margin_upper = 0.0;  // upper - mod
  bool pass = true;
};

/// Checks min(||f||^p-, ||f||^p+) <= rho(f) <= max(||f||^p-, ||f||^p+).
/// Fails only when violated beyond 1e-9 relative.
SandwichReport check_modular_norm_sandwich(const FieldSample& f, const ExponentField& p);

struct HolderReport {
  double lhs = 0.0;    // integral of |u v|
  double rhs = 0.0;    // 2 ||u||_p ||v||_p'
  double margin = 0.0; // rhs - lhs
  bool pass = true;
};

/// Holder's inequality with factor 2: int |u v| <= 2 ||u||_{p(x)} ||v||_{p'(x)}.
/// u and v must be sampled on the same quadrature.
HolderReport check_holder(const FieldSample& u, const FieldSample& v,
                          const ExponentField& p);

}  // namespace vexlap
