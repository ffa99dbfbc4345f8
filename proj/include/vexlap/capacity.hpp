#pragma once

#include "vexlap/solver.hpp"

namespace vexlap {

struct CapacityResult {
  double value = 0.0;       // modular of the potential gradient
  GridFunction potential;
  bool converged = false;
  int iterations = 0;
  /// Set when the constrained set has pixel-scale features the raster
  /// cannot resolve (fewer than 2x2 pixels in a row/column bounding box).
  bool subpixel = false;
  double pixel_size = 0.0;

  std::string to_json() const;
};

/// Relative p(x)-capacity of the raster-compact set E with respect to the
/// open domain D: minimize rho(grad u) over the discrete W1p0(D) with u
/// pinned to 1 at the nodes of E.  The iterates are kept in [0, 1]; on this
/// triangulation nodal truncation never increases the modular.
CapacityResult relative_capacity(const RasterDomain& E, const RasterDomain& D,
                                 const ExponentField& p, const Mesh& mesh,
                                 const SolveOptions& opts = {});

/// Sobolev p(x)-capacity: minimize the full modular
/// sum w |u|^{p} + sum |T| |grad u|^{p} with u pinned to 1 on E and free
/// boundary nodes (the mesh box plays the role of a large truncation box).
/// Returns 0 for an empty E.
CapacityResult sobolev_capacity(const RasterDomain& E, const ExponentField& p,
                                const Mesh& mesh, const SolveOptions& opts = {});

struct CapacityComparisonReport {
  double cap_pminus = 0.0;  // cap with the constant exponent p_-
  double cap_px = 0.0;      // cap with the variable exponent
  double C = 1.0;
  double beta = 1.0;
  double rhs = 0.0;         // C * max(cap_px, cap_px^beta)
  double margin = 0.0;      // rhs - cap_pminus
  double realized_ratio = 0.0;
  bool pass = true;
};

/// cap_{p_-}(E, D) <= C cap_{p(x)}(E, D)^beta with C and beta from the
/// Holder exponent p(x)/p_-:  beta = p_-/p_+ on the small-capacity branch,
/// C = 2 max(|D|^{(p_+ - p_-)/p_+}, 1); equality with C = beta = 1 when the
/// exponent is constant.
CapacityComparisonReport capacity_comparison_check(const RasterDomain& E,
                                                   const RasterDomain& D,
                                                   const ExponentField& p,
                                                   const SolveOptions& opts = {});

struct ConnectedLowerBoundReport {
  double value = 0.0;       // cap(K n closed B(x,r), B(x,2r))
  bool positive = false;
  double diam = 0.0;
  CapacityResult result;
};

/// Capacity of K n closed B(x, r) relative to B(x, 2r) for a connected
/// raster compact K.  The theorem guarantees a positive lower bound; the
/// artifact records the computed value.
ConnectedLowerBoundReport connected_lower_bound_check(const RasterDomain& K,
                                                      Vec2 x, double r,
                                                      const ExponentField& p,
                                                      const SolveOptions& opts = {});

struct AlphaConditionReport {
  int samples = 0;
  double min_capacity = 0.0;
  std::vector<double> capacities;
  bool vacuous = false;  // no boundary pixels to sample
  bool pass = false;
};

/// Samples boundary pixels x of the domain and radii r in {r0, r0/2, r0/4},
/// computes cap(complement n closed B(x,r), B(x,2r)) and passes when the
/// minimum stays >= alpha.
AlphaConditionReport alpha_r_condition_check(const RasterDomain& o,
                                             const ExponentField& p,
                                             double alpha, double r0,
                                             int max_samples = 16,
                                             const SolveOptions& opts = {});

}  // namespace vexlap
