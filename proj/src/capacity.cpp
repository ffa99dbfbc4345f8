#include "vexlap/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <nlohmann/json.hpp>

namespace vexlap {

namespace {

// Nodes pinned to one: corners of any pixel belonging to the set.
std::vector<std::uint8_t> nodes_touching(const RasterDomain& E, const Mesh& mesh) {
  std::vector<std::uint8_t> touch(mesh.node_count(), 0);
  for (int iy = 0; iy < E.ny(); ++iy) {
    for (int ix = 0; ix < E.nx(); ++ix) {
      if (!E.inside(ix, iy)) continue;
      touch[mesh.node_id(ix, iy)] = 1;
      touch[mesh.node_id(ix + 1, iy)] = 1;
      touch[mesh.node_id(ix, iy + 1)] = 1;
      touch[mesh.node_id(ix + 1, iy + 1)] = 1;
    }
  }
  return touch;
}

bool subpixel_features(const RasterDomain& E) {
  int minx = E.nx(), maxx = -1, miny = E.ny(), maxy = -1;
  for (int iy = 0; iy < E.ny(); ++iy)
    for (int ix = 0; ix < E.nx(); ++ix)
      if (E.inside(ix, iy)) {
        minx = std::min(minx, ix);
        maxx = std::max(maxx, ix);
        miny = std::min(miny, iy);
        maxy = std::max(maxy, iy);
      }
  if (maxx < 0) return true;
  return (maxx - minx + 1) < 2 || (maxy - miny + 1) < 2;
}

struct PinnedProblem {
  std::vector<std::uint8_t> fixed;
  std::vector<double> pinned;
};

// Combine the zero pins of the surrounding domain with unit pins on E.
PinnedProblem capacity_pins(const RasterDomain& E, const DofMap& zero_dofs,
                            const Mesh& mesh) {
  PinnedProblem pp;
  pp.fixed.assign(mesh.node_count(), 0);
  pp.pinned.assign(mesh.node_count(), 0.0);
  auto ones = nodes_touching(E, mesh);
  for (int n = 0; n < mesh.node_count(); ++n) {
    bool zero = zero_dofs.is_fixed(n);
    if (ones[n]) {
      if (zero)
        throw PreconditionViolated(
            "constraint set touches the fixed boundary at this resolution");
      pp.fixed[n] = 1;
      pp.pinned[n] = 1.0;
    } else if (zero) {
      pp.fixed[n] = 1;
    }
  }
  return pp;
}

}  // namespace

// The capacity solves reuse the solver's variational core through this hook.
CapacityResult solve_capacity_problem(const Mesh& mesh, const DofMap& dofs,
                                      const std::vector<double>& pinned,
                                      const ExponentField& p, bool include_mass,
                                      const SolveOptions& opts);

CapacityResult relative_capacity(const RasterDomain& E, const RasterDomain& D,
                                 const ExponentField& p, const Mesh& mesh,
                                 const SolveOptions& opts) {
  if (!E.same_grid(D)) throw ResolutionMismatch("E and D must share a grid");
  if (!mesh.matches(D)) throw ResolutionMismatch("mesh and domain gridding disagree");
  if (!mesh.matches(p)) throw IncompatibleSampling("exponent grid differs from mesh");
  if (E.is_empty()) throw EmptyConstraintSet("constraint set is empty");
  for (int iy = 0; iy < E.ny(); ++iy)
    for (int ix = 0; ix < E.nx(); ++ix)
      if (E.inside(ix, iy) && !D.inside(ix, iy))
        throw PreconditionViolated("constraint set leaves the domain");

  DofMap zero = restrict_dofs(mesh, D);
  PinnedProblem pp = capacity_pins(E, zero, mesh);
  DofMap dofs(mesh, pp.fixed);
  CapacityResult res =
      solve_capacity_problem(mesh, dofs, pp.pinned, p, /*include_mass=*/false, opts);
  res.subpixel = subpixel_features(E);
  res.pixel_size = E.pixel_size();
  return res;
}

CapacityResult sobolev_capacity(const RasterDomain& E, const ExponentField& p,
                                const Mesh& mesh, const SolveOptions& opts) {
  if (!mesh.matches(E)) throw ResolutionMismatch("mesh and set gridding disagree");
  if (!mesh.matches(p)) throw IncompatibleSampling("exponent grid differs from mesh");
  if (E.is_empty()) {
    CapacityResult res;
    res.value = 0.0;
    res.potential = GridFunction(mesh);
    res.converged = true;
    res.pixel_size = E.pixel_size();
    res.subpixel = true;
    return res;
  }
  auto ones = nodes_touching(E, mesh);
  std::vector<double> pinned(mesh.node_count(), 0.0);
  for (int n = 0; n < mesh.node_count(); ++n)
    if (ones[n]) pinned[n] = 1.0;
  DofMap dofs(mesh, std::move(ones));
  CapacityResult res =
      solve_capacity_problem(mesh, dofs, pinned, p, /*include_mass=*/true, opts);
  res.subpixel = subpixel_features(E);
  res.pixel_size = E.pixel_size();
  return res;
}

CapacityComparisonReport capacity_comparison_check(const RasterDomain& E,
                                                   const RasterDomain& D,
                                                   const ExponentField& p,
                                                   const SolveOptions& opts) {
  Mesh mesh = Mesh::build(D.box(), D.resolution());
  CapacityComparisonReport rep;
  rep.cap_px = relative_capacity(E, D, p, mesh, opts).value;
  ExponentField pm = make_exponent(
      ExponentDescriptor{ExponentDescriptor::Kind::Constant, p.p_minus(), 0, 0},
      D.box(), D.resolution());
  rep.cap_pminus = relative_capacity(E, D, pm, mesh, opts).value;
  double measure = static_cast<double>(D.inside_count()) * D.pixel_size() *
                   D.pixel_size();
  if (p.is_constant(1e-12)) {
    rep.C = 1.0;
    rep.beta = 1.0;
    rep.rhs = rep.cap_px;
  } else {
    rep.beta = p.p_minus() / p.p_plus();
    rep.C = 2.0 * std::max(std::pow(measure, (p.p_plus() - p.p_minus()) / p.p_plus()),
                           1.0);
    rep.rhs = rep.C * std::max(rep.cap_px, std::pow(rep.cap_px, rep.beta));
  }
  rep.margin = rep.rhs - rep.cap_pminus;
  rep.realized_ratio = rep.rhs > 0 ? rep.cap_pminus / rep.rhs : 0.0;
  rep.pass = rep.margin >= -1e-9 * std::max(1.0, rep.rhs);
  return rep;
}

namespace {

// Pixel-aligned square box of half-width `half` around a grid-snapped center.
struct LocalPatch {
  Box box;
  Vec2 center;
  int resolution;
};

LocalPatch snap_patch(Vec2 x, double half, const RasterDomain& base) {
  int res = base.resolution();
  double h = 1.0 / res;
  LocalPatch lp;
  lp.resolution = res;
  lp.center = {std::round(x.x * res) * h, std::round(x.y * res) * h};
  int cells = std::max(2, static_cast<int>(std::ceil(half * res)));
  lp.box = {lp.center.x - cells * h, lp.center.y - cells * h,
            lp.center.x + cells * h, lp.center.y + cells * h};
  return lp;
}

ExponentField resample_exponent(const ExponentField& p, Box box, int resolution) {
  int nx = static_cast<int>(std::llround(box.width() * resolution));
  int ny = static_cast<int>(std::llround(box.height() * resolution));
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  double h = 1.0 / resolution;
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      v.push_back(p.sample({box.x0 + ix * h, box.y0 + iy * h}));
  return {box, resolution, std::move(v)};
}

// Relative capacity of {complement predicate} n closed B(x, r) within B(x, 2r).
CapacityResult local_ball_capacity(Vec2 x, double r, const RasterDomain& base,
                                   const std::function<bool(Vec2)>& in_set,
                                   const ExponentField& p, const SolveOptions& opts) {
  LocalPatch lp = snap_patch(x, 2.0 * r, base);
  RasterDomain ball = rasterize_disk(lp.box, lp.resolution, lp.center, 2.0 * r);
  RasterDomain E(lp.box, lp.resolution);
  for (int iy = 0; iy < E.ny(); ++iy)
    for (int ix = 0; ix < E.nx(); ++ix) {
      Vec2 c = E.pixel_center(ix, iy);
      if ((c - lp.center).norm() <= r && in_set(c) && ball.inside(ix, iy))
        E.set(ix, iy, true);
    }
  Mesh mesh = Mesh::build(lp.box, lp.resolution);
  ExponentField p_loc = resample_exponent(p, lp.box, lp.resolution);
  if (E.is_empty()) {
    CapacityResult res;
    res.value = 0.0;
    res.potential = GridFunction(mesh);
    res.converged = true;
    res.subpixel = true;
    res.pixel_size = E.pixel_size();
    return res;
  }
  return relative_capacity(E, ball, p_loc, mesh, opts);
}

}  // namespace

ConnectedLowerBoundReport connected_lower_bound_check(const RasterDomain& K, Vec2 x,
                                                      double r, const ExponentField& p,
                                                      const SolveOptions& opts) {
  ConnectedLowerBoundReport rep;
  if (K.is_empty()) throw PreconditionViolated("K is empty");
  if (component_count(K.mask(), K.nx(), K.ny(), Connectivity::Eight) != 1)
    throw PreconditionViolated("K must be connected");

  // diameter over pixel centers (convex hull then pairwise)
  std::vector<Vec2> pts;
  for (int iy = 0; iy < K.ny(); ++iy)
    for (int ix = 0; ix < K.nx(); ++ix)
      if (K.inside(ix, iy)) pts.push_back(K.pixel_center(ix, iy));
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& q : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], q) <= 0) --k;
    hull[k++] = q;
  }
  std::size_t lower = k + 1;
  for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k > 1 ? k - 1 : k);
  double diam = 0.0;
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j)
      diam = std::max(diam, (hull[i] - hull[j]).norm());
  rep.diam = diam;

  double h = K.pixel_size();
  int px = static_cast<int>(std::floor((x.x - K.box().x0) / h));
  int py = static_cast<int>(std::floor((x.y - K.box().y0) / h));
  bool on_k = false;
  for (int dy = -1; dy <= 1 && !on_k; ++dy)
    for (int dx = -1; dx <= 1 && !on_k; ++dx) {
      int qx = px + dx, qy = py + dy;
      if (qx >= 0 && qx < K.nx() && qy >= 0 && qy < K.ny() && K.inside(qx, qy))
        on_k = true;
    }
  if (!on_k) throw PreconditionViolated("x does not lie on K");
  if (!(r > 0) || r >= diam / 2)
    throw PreconditionViolated("radius must satisfy 0 < r < diam(K)/2");
  if (r < 2 * h) throw PreconditionViolated("radius is below two pixels");

  auto in_k = [&](Vec2 c) {
    int ix = static_cast<int>(std::floor((c.x - K.box().x0) / h));
    int iy = static_cast<int>(std::floor((c.y - K.box().y0) / h));
    return ix >= 0 && ix < K.nx() && iy >= 0 && iy < K.ny() && K.inside(ix, iy);
  };
  rep.result = local_ball_capacity(x, r, K, in_k, p, opts);
  rep.value = rep.result.value;
  rep.positive = rep.value > 0.0;
  return rep;
}

AlphaConditionReport alpha_r_condition_check(const RasterDomain& o,
                                             const ExponentField& p, double alpha,
                                             double r0, int max_samples,
                                             const SolveOptions& opts) {
  AlphaConditionReport rep;
  double h = o.pixel_size();

  // boundary samples: complement pixels (within the closed box) that touch
  // the domain
  std::vector<Vec2> samples;
  for (int iy = 0; iy < o.ny(); ++iy) {
    for (int ix = 0; ix < o.nx(); ++ix) {
      if (!o.inside(ix, iy)) {
        bool touches = false;
        for (int dy = -1; dy <= 1 && !touches; ++dy)
          for (int dx = -1; dx <= 1 && !touches; ++dx) {
            int qx = ix + dx, qy = iy + dy;
            if (qx >= 0 && qx < o.nx() && qy >= 0 && qy < o.ny() && o.inside(qx, qy))
              touches = true;
          }
        if (touches) samples.push_back(o.pixel_center(ix, iy));
      } else if (ix == 0 || ix == o.nx() - 1 || iy == 0 || iy == o.ny() - 1) {
        // domain reaches the box edge; the edge is part of the boundary
        Vec2 c = o.pixel_center(ix, iy);
        if (ix == 0) samples.push_back({o.box().x0, c.y});
        if (ix == o.nx() - 1) samples.push_back({o.box().x1, c.y});
        if (iy == 0) samples.push_back({c.x, o.box().y0});
        if (iy == o.ny() - 1) samples.push_back({c.x, o.box().y1});
      }
    }
  }
  if (samples.empty()) {
    rep.vacuous = true;
    rep.pass = true;
    return rep;
  }
  std::size_t stride = std::max<std::size_t>(1, samples.size() / max_samples);
  auto outside = [&](Vec2 c) {
    int ix = static_cast<int>(std::floor((c.x - o.box().x0) / h));
    int iy = static_cast<int>(std::floor((c.y - o.box().y0) / h));
    if (ix < 0 || ix >= o.nx() || iy < 0 || iy >= o.ny()) return true;
    return !o.inside(ix, iy);
  };
  double minimum = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples.size(); s += stride) {
    for (double r : {r0, r0 / 2, r0 / 4}) {
      if (r < 2 * h) continue;  // unresolved at this raster scale
      CapacityResult cr = local_ball_capacity(samples[s], r, o, outside, p, opts);
      rep.capacities.push_back(cr.value);
      minimum = std::min(minimum, cr.value);
      ++rep.samples;
    }
  }
  if (rep.samples == 0) {
    rep.vacuous = true;
    rep.pass = true;
    return rep;
  }
  rep.min_capacity = minimum;
  rep.pass = minimum >= alpha;
  return rep;
}

std::string CapacityResult::to_json() const {
  nlohmann::json j;
  j["value"] = value;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["subpixel"] = subpixel;
  j["pixel_size"] = pixel_size;
  return j.dump(2);
}

}  // namespace vexlap
