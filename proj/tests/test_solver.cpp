#include <doctest.h>

#include <cmath>
#include <random>

#include "test_helpers.hpp"
#include "vexlap/geometry.hpp"
#include "vexlap/solver.hpp"

using namespace vexlap;
using namespace vexlap::testing;

namespace {

struct DiskSetup {
  Box box;
  RasterDomain domain;
  Mesh mesh;
  DofMap dofs;

  DiskSetup(double radius, int res, int pad_cells)
      : box{-(radius + static_cast<double>(pad_cells) / res),
            -(radius + static_cast<double>(pad_cells) / res),
            radius + static_cast<double>(pad_cells) / res,
            radius + static_cast<double>(pad_cells) / res},
        domain(rasterize_disk(box, res, {0, 0}, radius)),
        mesh(Mesh::build(box, res)),
        dofs(restrict_dofs(mesh, domain)) {}
};

SourceTerm unit_source(const Mesh& mesh) {
  return SourceTerm::scalar(GridFunction(mesh, 1.0));
}

}  // namespace

TEST_CASE("zero source gives the zero solution exactly") {
  Mesh mesh = Mesh::build(unit_box(), 16);
  DofMap dofs = box_interior_dofs(mesh);
  ExponentField p = affine_exponent(1.8, 0.6, 0.0);
  SourceTerm f = SourceTerm::scalar(GridFunction(mesh, 0.0));
  auto [u, rep] = solve_dirichlet(mesh, dofs, f, p, {});
  CHECK(u.max_abs() == 0.0);
  CHECK(rep.converged);
}

TEST_CASE("solving with every dof pinned is an error") {
  Mesh mesh = Mesh::build(unit_box(), 8);
  RasterDomain empty = RasterDomain::empty(unit_box(), 8);
  DofMap dofs = restrict_dofs(mesh, empty);
  ExponentField p = constant_exponent(2.0, unit_box(), 8);
  CHECK_THROWS_AS(solve_dirichlet(mesh, dofs, unit_source(mesh), p, {}),
                  NoActiveDofs);
}

TEST_CASE("p = 2 disk solution tracks the radial closed form") {
  // raster pinning shifts the effective boundary inward by O(h), so the
  // comparison at this resolution carries a first-order boundary term
  DiskSetup s(1.0, 64, 8);
  ExponentField p = constant_exponent(2.0, s.box, 64);
  auto [u, rep] = solve_dirichlet(s.mesh, s.dofs, unit_source(s.mesh), p, {});
  REQUIRE(rep.converged);
  double worst = 0.0;
  for (int n = 0; n < s.mesh.node_count(); ++n) {
    double r2 = s.mesh.node_xy(n).norm2();
    double exact = std::max(0.0, (1.0 - r2) / 4.0);
    worst = std::max(worst, std::abs(u[n] - exact));
  }
  // O(h) boundary offset: about the mean pinning depth times |grad u| = 1/2
  CHECK(worst < 1.0 * s.mesh.h());
  CHECK(u[s.mesh.node_id(s.mesh.nx() / 2, s.mesh.ny() / 2)] ==
        doctest::Approx(0.25).epsilon(0.03));
}

TEST_CASE("p = 4 disk solution tracks the radial closed form in L2") {
  int res = 64;
  DiskSetup s(1.0, res, 8);
  ExponentField p = constant_exponent(4.0, s.box, res);
  auto [u, rep] = solve_dirichlet(s.mesh, s.dofs, unit_source(s.mesh), p, {});
  REQUIRE(rep.converged);
  double c = 0.75 * std::pow(0.5, 1.0 / 3.0);
  double num = 0.0, den = 0.0;
  for (int n = 0; n < s.mesh.node_count(); ++n) {
    double w = s.mesh.lumped_weight(n);
    double r = s.mesh.node_xy(n).norm();
    double exact = r >= 1.0 ? 0.0 : c * (1.0 - std::pow(r, 4.0 / 3.0));
    num += w * (u[n] - exact) * (u[n] - exact);
    den += w * exact * exact;
  }
  CHECK(std::sqrt(num / den) < 0.05);  // dominated by the O(h) boundary offset
}

TEST_CASE("a degenerate exponent below two still converges") {
  DiskSetup s(0.4, 32, 4);
  ExponentField p = constant_exponent(1.5, s.box, 32);
  auto [u, rep] = solve_dirichlet(s.mesh, s.dofs, unit_source(s.mesh), p, {});
  CHECK(rep.converged);
  CHECK(rep.residual_dual_estimate <= 1e-8);
  CHECK(u.max_value() > 0.0);
}

TEST_CASE("residual of the p = 2 problem matches the five-point stencil") {
  int res = 16;
  Mesh mesh = Mesh::build(unit_box(), res);
  DofMap dofs = box_interior_dofs(mesh);
  ExponentField p = constant_exponent(2.0, unit_box(), res);
  std::mt19937_64 rng(67);
  GridFunction u = random_field(mesh, rng);
  u.apply_zero(dofs);
  GridFunction f0 = random_field(mesh, rng);
  SourceTerm f = SourceTerm::scalar(f0);
  auto r = residual(u, f, p, dofs);
  double h2 = mesh.h() * mesh.h();
  for (int k = 0; k < dofs.active_count(); ++k) {
    int n = dofs.active_nodes()[k];
    int ix = n % (res + 1), iy = n / (res + 1);
    double stencil = 4.0 * u[n] - u[mesh.node_id(ix - 1, iy)] -
                     u[mesh.node_id(ix + 1, iy)] - u[mesh.node_id(ix, iy - 1)] -
                     u[mesh.node_id(ix, iy + 1)] - h2 * f0[n];
    CHECK(r[k] == doctest::Approx(stencil).epsilon(1e-10));
  }
}

TEST_CASE("residual is the gradient of the energy") {
  int res = 8;
  Mesh mesh = Mesh::build(unit_box(), res);
  DofMap dofs = box_interior_dofs(mesh);
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 5; ++trial) {
    ExponentField p = random_exponent(unit_box(), res, rng, 1.6, 3.2);
    GridFunction u = random_field(mesh, rng, 0.05, 0.4);
    u.apply_zero(dofs);
    GridFunction g1 = random_field(mesh, rng), g2 = random_field(mesh, rng);
    SourceTerm f;
    f.f0 = random_field(mesh, rng);
    f.fvec = std::make_pair(g1, g2);
    auto r = residual(u, f, p, dofs);
    double t = 1e-6;
    for (int k = 0; k < dofs.active_count(); k += 7) {
      int n = dofs.active_nodes()[k];
      GridFunction up = u, um = u;
      up[n] += t;
      um[n] -= t;
      double fd = (energy(up, f, p) - energy(um, f, p)) / (2 * t);
      CHECK(std::abs(r[k] - fd) <=
            1e-5 * std::max({std::abs(r[k]), std::abs(fd), 1e-8}));
    }
  }
}

TEST_CASE("directional derivative of the energy approaches the residual pairing") {
  int res = 8;
  Mesh mesh = Mesh::build(unit_box(), res);
  DofMap dofs = box_interior_dofs(mesh);
  ExponentField p = affine_exponent(2.2, 0.4, 0.1, unit_box(), res);
  std::mt19937_64 rng(73);
  GridFunction u = random_field(mesh, rng, 0.05, 0.3);
  u.apply_zero(dofs);
  GridFunction phi = random_field(mesh, rng, 0.05, 0.3);
  phi.apply_zero(dofs);
  SourceTerm f = unit_source(mesh);
  auto r = residual(u, f, p, dofs);
  double pairing = 0.0;
  for (int k = 0; k < dofs.active_count(); ++k)
    pairing += r[k] * phi[dofs.active_nodes()[k]];
  double prev_err = 1e100;
  for (double t : {1e-2, 1e-3, 1e-4}) {
    double fd = (energy(u + t * phi, f, p) - energy(u, f, p)) / t;
    double err = std::abs(fd - pairing);
    CHECK(err < prev_err);  // first order in t
    prev_err = err;
  }
}

TEST_CASE("energy of the reference hat function") {
  // six-triangle patch: sum of area * |grad hat|^2 equals 4, so the
  // p = 2 Dirichlet energy is 2
  Mesh mesh = Mesh::build(unit_box(), 4);
  GridFunction hat(mesh);
  hat[mesh.node_id(2, 2)] = 1.0;
  ExponentField p = constant_exponent(2.0, unit_box(), 4);
  SourceTerm f0 = SourceTerm::scalar(GridFunction(mesh, 0.0));
  CHECK(energy(hat, f0, p) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("Dirichlet part scales like the p-th power for constant exponents") {
  Mesh mesh = Mesh::build(unit_box(), 8);
  std::mt19937_64 rng(79);
  GridFunction u = random_field(mesh, rng);
  SourceTerm f0 = SourceTerm::scalar(GridFunction(mesh, 0.0));
  for (double c : {1.5, 2.0, 3.0}) {
    ExponentField p = constant_exponent(c, unit_box(), 8);
    double e1 = energy(u, f0, p);
    double e2 = energy(2.0 * u, f0, p);
    CHECK(e2 == doctest::Approx(std::pow(2.0, c) * e1).epsilon(1e-11));
  }
}

TEST_CASE("energy trace of a solve is nonincreasing") {
  DiskSetup s(0.4, 32, 4);
  for (double pexp : {1.5, 3.0}) {
    ExponentField p = constant_exponent(pexp, s.box, 32);
    auto [u, rep] = solve_dirichlet(s.mesh, s.dofs, unit_source(s.mesh), p, {});
    REQUIRE(rep.energy_trace.size() >= 2);
    for (std::size_t k = 1; k < rep.energy_trace.size(); ++k) {
      double prev = rep.energy_trace[k - 1];
      CHECK(rep.energy_trace[k] <= prev + 1e-14 * std::max(1.0, std::abs(prev)));
    }
  }
}

TEST_CASE("solutions from different random starts coincide") {
  Mesh mesh = Mesh::build(unit_box(), 16);
  DofMap dofs = box_interior_dofs(mesh);
  ExponentField p = affine_exponent(1.7, 0.8, 0.2);
  SourceTerm f = unit_source(mesh);
  SolveOptions opts;
  opts.tol = 1e-11;
  std::mt19937_64 rng(83);
  GridFunction u0 = random_field(mesh, rng);
  GridFunction u1 = random_field(mesh, rng);
  SolveOptions o1 = opts, o2 = opts;
  o1.initial = u0.values();
  o2.initial = u1.values();
  auto [a, ra] = solve_dirichlet(mesh, dofs, f, p, o1);
  auto [b, rb] = solve_dirichlet(mesh, dofs, f, p, o2);
  CHECK((a - b).max_abs() <= 10 * opts.tol);
}

TEST_CASE("p = 2 solve agrees with the direct sparse path") {
  DiskSetup s(0.4, 32, 4);
  ExponentField p = constant_exponent(2.0, s.box, 32);
  SourceTerm f = unit_source(s.mesh);
  auto [u, rep] = solve_dirichlet(s.mesh, s.dofs, f, p, {});
  GridFunction v = solve_linear_p2(s.mesh, s.dofs, f, 0.0);
  CHECK((u - v).max_abs() <= 1e-8);
}

TEST_CASE("weak maximum principle holds to solver tolerance") {
  DiskSetup s(0.4, 32, 4);
  SourceTerm f = unit_source(s.mesh);

  ExponentField p2 = constant_exponent(2.0, s.box, 32);
  auto [u2, r2] = solve_dirichlet(s.mesh, s.dofs, f, p2, {});
  CHECK(u2.min_value() >= -1e-8);

  ExponentField pv = affine_exponent(1.8, 0.5, 0.2, s.box, 32);
  auto [uv, rv] = solve_dirichlet(s.mesh, s.dofs, f, pv, {});
  CHECK(uv.min_value() >= -1e-6);
}

TEST_CASE("solutions are monotone in the domain") {
  int res = 32;
  Box box = unit_box();
  RasterDomain square = rasterize_rect(box, res, {0.15, 0.15, 0.85, 0.85});
  RasterDomain disk = rasterize_disk(box, res, {0.5, 0.5}, 0.3);
  Mesh mesh = Mesh::build(box, res);
  SourceTerm f = unit_source(mesh);
  for (bool variable : {false, true}) {
    ExponentField p = variable ? affine_exponent(2.0, 0.5, 0.0, box, res)
                               : constant_exponent(2.0, box, res);
    double tol = variable ? 1e-6 : 1e-8;
    auto [u_small, rs] = solve_dirichlet(mesh, restrict_dofs(mesh, disk), f, p, {});
    auto [u_big, rb] = solve_dirichlet(mesh, restrict_dofs(mesh, square), f, p, {});
    auto ord = compare_solutions(u_small, u_big);
    CHECK(ord.max_u_minus_v <= tol);
  }
}

TEST_CASE("compare_solutions of a field with itself") {
  Mesh mesh = Mesh::build(unit_box(), 8);
  GridFunction u(mesh, 0.3);
  CHECK(compare_solutions(u, u).max_u_minus_v == 0.0);
}

// ---- Simon's inequality ---------------------------------------------------------

TEST_CASE("Simon ratio for p = 2 is exactly one") {
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int k = 0; k < 100; ++k) {
    Vec2 a{uni(rng), uni(rng)}, b{uni(rng), uni(rng)};
    if ((b - a).norm() < 1e-9) continue;
    CHECK(simon_ratio(a, b, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Simon ratio degenerates only for coincident pairs") {
  CHECK_THROWS_AS(simon_ratio({0.5, 0.5}, {0.5, 0.5}, 3.0), DegeneratePair);
  CHECK_THROWS_AS(simon_ratio({0, 0}, {0, 0}, 1.5), DegeneratePair);
}

TEST_CASE("calibrated Simon constant certifies random pairs") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (double p : {1.5, 3.0}) {
    SimonCalibration cal = simon_calibrate(p, 100000);
    CHECK(cal.min_ratio > 0.0);
    CHECK(cal.c1 == doctest::Approx(0.5 * cal.min_ratio));
    for (int k = 0; k < 1000; ++k) {
      Vec2 a{uni(rng), uni(rng)}, b{uni(rng), uni(rng)};
      if ((b - a).norm() < 1e-9) continue;
      auto rep = simon_inequality_check(a, b, p, cal.c1);
      CHECK(rep.pass);
    }
  }
}

TEST_CASE("Simon check accepts coincident pairs with zero sides") {
  auto rep = simon_inequality_check({0.3, -0.2}, {0.3, -0.2}, 3.0, 0.5);
  CHECK(rep.pass);
  CHECK(rep.lhs == 0.0);
}

// ---- dual norm and a-priori bound -------------------------------------------------

TEST_CASE("dual norm estimate of the zero source vanishes") {
  Mesh mesh = Mesh::build(unit_box(), 16);
  ExponentField p = constant_exponent(2.0);
  SourceTerm f = SourceTerm::scalar(GridFunction(mesh, 0.0));
  CHECK(dual_norm_estimate(f, p, mesh) == 0.0);
}

TEST_CASE("dual norm estimate is exactly homogeneous in the source") {
  Mesh mesh = Mesh::build(unit_box(), 16);
  ExponentField p = constant_exponent(2.0);
  GridFunction f0(mesh, 1.0);
  double e1 = dual_norm_estimate(SourceTerm::scalar(f0), p, mesh);
  double e2 = dual_norm_estimate(SourceTerm::scalar(2.0 * f0), p, mesh);
  CHECK(e2 == doctest::Approx(2.0 * e1).epsilon(1e-12));
}

TEST_CASE("dual norm estimate of the unit source on the unit square") {
  // ||1||_{-1,2} = sqrt(int w) with -Lap w = 1: about 0.1874 on the unit
  // square, below the Poincare upper bound 1/(sqrt(2) pi) ||1||_2
  Mesh mesh = Mesh::build(unit_box(), 32);
  ExponentField p = constant_exponent(2.0, unit_box(), 32);
  SourceTerm f = unit_source(mesh);
  double est = dual_norm_estimate(f, p, mesh);
  CHECK(est > 0.18);
  CHECK(est <= 1.0 / (std::sqrt(2.0) * 3.14159265) + 1e-3);
}

TEST_CASE("a-priori gradient bound in terms of the source") {
  DiskSetup s(0.4, 32, 4);
  ExponentField p = constant_exponent(2.0, s.box, 32);

  SourceTerm zero = SourceTerm::scalar(GridFunction(s.mesh, 0.0));
  auto [u0, rep0] = solve_dirichlet(s.mesh, s.dofs, zero, p, {});
  auto a0 = a_priori_bound_check(u0, zero, p, s.dofs);
  CHECK(a0.pass);
  CHECK(a0.grad_modular == 0.0);

  SourceTerm f = unit_source(s.mesh);
  auto [u, rep] = solve_dirichlet(s.mesh, s.dofs, f, p, {});
  auto a1 = a_priori_bound_check(u, f, p, s.dofs);
  CHECK(a1.pass);
  CHECK(a1.margin >= 0.0);
}

TEST_CASE("doubling the source scales the gradient modular by the dual power") {
  DiskSetup s(0.4, 32, 4);
  for (double c : {1.5, 2.0, 3.0}) {
    ExponentField p = constant_exponent(c, s.box, 32);
    SourceTerm f = unit_source(s.mesh);
    SolveOptions opts;
    opts.tol = 1e-10;
    auto [u1, r1] = solve_dirichlet(s.mesh, s.dofs, f, p, opts);
    auto [u2, r2] = solve_dirichlet(s.mesh, s.dofs, f.scaled(2.0), p, opts);
    double m1 = modular(gradient(u1), p);
    double m2 = modular(gradient(u2), p);
    CHECK(m2 == doctest::Approx(std::pow(2.0, c / (c - 1.0)) * m1).epsilon(1e-6));
  }
}

// ---- stability ---------------------------------------------------------------------

TEST_CASE("identical sources give zero stability gap") {
  RasterDomain o = rasterize_disk(unit_box(), 32, {0.5, 0.5}, 0.35);
  ExponentField p = constant_exponent(2.0, unit_box(), 32);
  Mesh mesh = Mesh::build(unit_box(), 32);
  SourceTerm f = unit_source(mesh);
  auto rep = stability_check(f, f, o, p);
  CHECK(rep.lhs == 0.0);
  CHECK(rep.delta_norm == 0.0);
}

TEST_CASE("default stability exponent is the conjugate of p_minus") {
  ExponentField p = constant_exponent(2.0);
  CHECK(default_stability_beta(p) == doctest::Approx(2.0));
  ExponentField q = affine_exponent(1.5, 1.0, 0.0);
  CHECK(default_stability_beta(q) == doctest::Approx(3.0));
}

TEST_CASE("stability ratios stay bounded along a shrinking perturbation") {
  RasterDomain o = rasterize_disk(unit_box(), 24, {0.5, 0.5}, 0.35);
  ExponentField p = constant_exponent(2.0, unit_box(), 24);
  Mesh mesh = Mesh::build(unit_box(), 24);
  SourceTerm base = unit_source(mesh);
  SourceTerm g = SourceTerm::scalar(GridFunction(mesh, 24.0));
  auto rep = stability_sequence_check(base, g, {1.0, 0.5, 0.25, 0.125}, o, p);
  REQUIRE(rep.ratios.size() == 4);
  CHECK(rep.max_over_min <= 50.0);
}
