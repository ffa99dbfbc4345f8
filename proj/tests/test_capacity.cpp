#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_helpers.hpp"
#include "vexlap/capacity.hpp"
#include "vexlap/geometry.hpp"

using namespace vexlap;
using namespace vexlap::testing;

namespace {

struct Condenser {
  Box box = unit_box();
  int res;
  RasterDomain D;
  RasterDomain E;
  Mesh mesh;

  Condenser(double r_in, double r_out, int res)
      : res(res),
        D(rasterize_disk(unit_box(), res, {0.5, 0.5}, r_out)),
        E(rasterize_disk(unit_box(), res, {0.5, 0.5}, r_in, RasterMode::Center)),
        mesh(Mesh::build(unit_box(), res)) {}
};

}  // namespace

TEST_CASE("annulus capacity approaches the analytic condenser value") {
  // cap = 2 pi / log(R/r) for p = 2; raster pinning biases the value up
  Condenser c(0.1, 0.4, 128);
  ExponentField p = constant_exponent(2.0, unit_box(), 128);
  CapacityResult res = relative_capacity(c.E, c.D, p, c.mesh);
  REQUIRE(res.converged);
  double exact = 2.0 * std::numbers::pi / std::log(4.0);
  CHECK(std::abs(res.value - exact) / exact < 0.08);
}

TEST_CASE("capacity potential stays within the unit range") {
  Condenser c(0.12, 0.4, 64);
  ExponentField p = affine_exponent(2.0, 0.5, 0.0, unit_box(), 64);
  CapacityResult res = relative_capacity(c.E, c.D, p, c.mesh);
  REQUIRE(res.converged);
  CHECK(res.potential.min_value() >= -1e-10);
  CHECK(res.potential.max_value() <= 1.0 + 1e-10);
}

TEST_CASE("empty constraint sets are rejected") {
  int res = 32;
  RasterDomain D = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.4);
  RasterDomain E = RasterDomain::empty(unit_box(), res);
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  CHECK_THROWS_AS(relative_capacity(E, D, p, mesh), EmptyConstraintSet);
}

TEST_CASE("a constraint set reaching the pinned boundary is rejected") {
  int res = 32;
  RasterDomain D = rasterize_rect(unit_box(), res, {0.2, 0.2, 0.8, 0.8});
  RasterDomain E = rasterize_rect(unit_box(), res, {0.2, 0.2, 0.5, 0.5},
                                  RasterMode::Center);
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  CHECK_THROWS_AS(relative_capacity(E, D, p, mesh), PreconditionViolated);
}

TEST_CASE("capacity is monotone in the constraint set") {
  int res = 64;
  RasterDomain D = RasterDomain::full(unit_box(), res);
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = affine_exponent(2.0, 0.4, 0.2, unit_box(), res);
  RasterDomain e1 = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.08,
                                   RasterMode::Center);
  RasterDomain e2 = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.2,
                                   RasterMode::Center);
  double c1 = relative_capacity(e1, D, p, mesh).value;
  double c2 = relative_capacity(e2, D, p, mesh).value;
  CHECK(c1 <= c2 * (1.0 + 1e-10));
}

TEST_CASE("capacity is antitone in the surrounding domain") {
  int res = 64;
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  RasterDomain E = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.1,
                                  RasterMode::Center);
  RasterDomain d1 = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.3);
  RasterDomain d2 = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.45);
  double c1 = relative_capacity(E, d1, p, mesh).value;
  double c2 = relative_capacity(E, d2, p, mesh).value;
  CHECK(c2 <= c1 * (1.0 + 1e-10));
}

TEST_CASE("capacity potentials are unique across random starts") {
  Condenser c(0.12, 0.4, 32);
  ExponentField p = affine_exponent(1.8, 0.5, 0.0, unit_box(), 32);
  SolveOptions o1, o2;
  o1.tol = o2.tol = 1e-11;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<double> s1(c.mesh.node_count()), s2(c.mesh.node_count());
  for (auto& v : s1) v = uni(rng);
  for (auto& v : s2) v = uni(rng);
  o1.initial = s1;
  o2.initial = s2;
  CapacityResult r1 = relative_capacity(c.E, c.D, p, c.mesh, o1);
  CapacityResult r2 = relative_capacity(c.E, c.D, p, c.mesh, o2);
  CHECK((r1.potential - r2.potential).max_abs() <= 10 * o1.tol);
  CHECK(r1.value == doctest::Approx(r2.value).epsilon(1e-9));
}

TEST_CASE("full-domain constraint set still yields a finite capacity") {
  int res = 32;
  RasterDomain D = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.42);
  RasterDomain E = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.30,
                                  RasterMode::Center);
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  CapacityResult coarse = relative_capacity(E, D, p, mesh);
  REQUIRE(coarse.converged);
  CHECK(coarse.value > 0.0);
  CHECK(std::isfinite(coarse.value));

  // two-resolution consistency
  int res2 = 64;
  RasterDomain D2 = rasterize_disk(unit_box(), res2, {0.5, 0.5}, 0.42);
  RasterDomain E2 = rasterize_disk(unit_box(), res2, {0.5, 0.5}, 0.30,
                                   RasterMode::Center);
  Mesh mesh2 = Mesh::build(unit_box(), res2);
  ExponentField p2 = constant_exponent(2.0, unit_box(), res2);
  CapacityResult fine = relative_capacity(E2, D2, p2, mesh2);
  CHECK(std::abs(fine.value - coarse.value) / fine.value < 0.25);
}

// ---- Sobolev capacity ---------------------------------------------------------

TEST_CASE("Sobolev capacity of the empty set is zero by convention") {
  int res = 32;
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  CapacityResult r = sobolev_capacity(RasterDomain::empty(unit_box(), res), p, mesh);
  CHECK(r.value == 0.0);
  CHECK(r.converged);
}

TEST_CASE("Sobolev capacity dominates the gradient part of its minimizer") {
  int res = 32;
  Mesh mesh = Mesh::build(unit_box(), res);
  ExponentField p = affine_exponent(2.0, 0.3, 0.0, unit_box(), res);
  RasterDomain E = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.15,
                                  RasterMode::Center);
  CapacityResult r = sobolev_capacity(E, p, mesh);
  REQUIRE(r.converged);
  double grad_part = modular(gradient(r.potential), p);
  CHECK(r.value >= grad_part - 1e-12);
  CHECK(r.potential.min_value() >= -1e-10);
  CHECK(r.potential.max_value() <= 1.0 + 1e-10);
}

TEST_CASE("Sobolev capacity decreases as the truncation box grows") {
  // same disk in boxes of side 1, 2 and 4
  double prev = 1e300;
  for (double side : {1.0, 2.0, 4.0}) {
    int res = 32;
    Box box{0, 0, side, side};
    Mesh mesh = Mesh::build(box, res);
    ExponentField p = constant_exponent(2.0, box, res);
    RasterDomain E = rasterize_disk(box, res, {side / 2, side / 2}, 0.15,
                                    RasterMode::Center);
    CapacityResult r = sobolev_capacity(E, p, mesh);
    REQUIRE(r.converged);
    CHECK(r.value <= prev * (1.0 + 1e-10));
    prev = r.value;
  }
}

// ---- capacity comparison --------------------------------------------------------

TEST_CASE("constant exponents give equality in the capacity comparison") {
  int res = 48;
  RasterDomain D = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.4);
  RasterDomain E = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.1,
                                  RasterMode::Center);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  auto rep = capacity_comparison_check(E, D, p);
  CHECK(rep.pass);
  CHECK(rep.C == 1.0);
  CHECK(rep.beta == 1.0);
  CHECK(rep.cap_pminus == doctest::Approx(rep.cap_px).epsilon(1e-9));
}

TEST_CASE("variable exponents keep a nonnegative comparison margin") {
  int res = 48;
  RasterDomain D = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.42);
  RasterDomain E = rasterize_disk(unit_box(), res, {0.5, 0.5}, 0.12,
                                  RasterMode::Center);
  ExponentField p = affine_exponent(2.0, 0.5, 0.0, unit_box(), res);
  auto rep = capacity_comparison_check(E, D, p);
  CHECK(rep.pass);
  CHECK(rep.margin >= 0.0);
  CHECK(rep.realized_ratio <= 1.0);
}

TEST_CASE("the comparison inequality follows shrinking constraint sets") {
  int res = 64;
  RasterDomain D = RasterDomain::full(unit_box(), res);
  ExponentField p = affine_exponent(2.0, 0.5, 0.0, unit_box(), res);
  double prev_px = 1e300;
  for (double r : {0.2, 0.1, 0.05}) {
    RasterDomain E = rasterize_disk(unit_box(), res, {0.35, 0.5}, r,
                                    RasterMode::Center);
    auto rep = capacity_comparison_check(E, D, p);
    CHECK(rep.pass);
    CHECK(rep.cap_px <= prev_px * (1 + 1e-10));
    prev_px = rep.cap_px;
  }
}

// ---- connected lower bound -------------------------------------------------------

TEST_CASE("segments carry positive capacity") {
  int res = 128;
  RasterDomain K(unit_box(), res);
  // horizontal segment of length 0.5 as a one-pixel-thick mask
  int iy = res / 2;
  for (int ix = res / 4; ix < 3 * res / 4; ++ix) K.set(ix, iy, true);
  ExponentField p = affine_exponent(1.8, 0.4, 0.0, unit_box(), res);
  auto rep = connected_lower_bound_check(K, {0.5, 0.5 + 0.5 / res}, 0.1, p);
  CHECK(rep.positive);
  CHECK(rep.value > 0.0);
  CHECK(rep.diam == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("degenerate compacts are rejected") {
  int res = 64;
  RasterDomain K(unit_box(), res);
  K.set(32, 32, true);  // a single pixel has diameter zero
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  CHECK_THROWS_AS(connected_lower_bound_check(K, {0.5, 0.5}, 0.1, p),
                  PreconditionViolated);

  RasterDomain two(unit_box(), res);
  two.set(10, 10, true);
  two.set(40, 40, true);  // disconnected
  CHECK_THROWS_AS(connected_lower_bound_check(two, {0.16, 0.16}, 0.1, p),
                  PreconditionViolated);
}

TEST_CASE("local capacities are stable under refinement") {
  auto run = [](int res) {
    RasterDomain K(unit_box(), res);
    int iy = res / 2;
    for (int ix = res / 4; ix < 3 * res / 4; ++ix) K.set(ix, iy, true);
    ExponentField p = constant_exponent(2.0, unit_box(), res);
    return connected_lower_bound_check(K, {0.5, 0.5 + 0.5 / res}, 0.1, p).value;
  };
  double coarse = run(64), fine = run(128);
  CHECK(std::abs(fine - coarse) / fine < 0.2);
}

// ---- boundary capacity density ----------------------------------------------------

TEST_CASE("a thick complement passes the density condition") {
  int res = 64;
  RasterDomain o = rasterize_rect(unit_box(), res, {0.3, 0.3, 0.7, 0.7});
  ExponentField p = affine_exponent(2.0, 0.3, 0.0, unit_box(), res);
  auto rep = alpha_r_condition_check(o, p, 0.0, 0.1, 8);
  REQUIRE(!rep.vacuous);
  REQUIRE(rep.samples > 0);
  CHECK(rep.min_capacity > 0.5);  // calibration: thick complements sit well above
  // re-run as an assertion against the calibrated floor
  auto rep2 = alpha_r_condition_check(o, p, 0.5 * rep.min_capacity, 0.1, 8);
  CHECK(rep2.pass);
}

TEST_CASE("tiny holes fail the density condition at a fixed alpha") {
  int res = 256;
  RasterDomain o = cioranescu_murat_domain(12, res);  // holes of radius 1/144
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  auto rep = alpha_r_condition_check(o, p, 1.0, 0.1, 6);
  REQUIRE(!rep.vacuous);
  CHECK(!rep.pass);
  CHECK(rep.min_capacity < 1.0);
}

TEST_CASE("an empty boundary sample is a vacuous pass") {
  int res = 16;
  RasterDomain o = RasterDomain::empty(unit_box(), res);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  auto rep = alpha_r_condition_check(o, p, 0.1, 0.1);
  CHECK(rep.vacuous);
  CHECK(rep.pass);
}
