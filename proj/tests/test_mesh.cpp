#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include "test_helpers.hpp"
#include "vexlap/lebesgue.hpp"
#include "vexlap/mesh.hpp"

using namespace vexlap;
using namespace vexlap::testing;

TEST_CASE("mesh counts") {
  Mesh coarse = Mesh::build(unit_box(), 2);
  CHECK(coarse.node_count() == 9);
  CHECK(coarse.tri_count() == 8);

  Mesh fine = Mesh::build(unit_box(), 64);
  CHECK(fine.node_count() == 65 * 65);

  CHECK_THROWS_AS(Mesh::build(unit_box(), 1), PreconditionViolated);
}

TEST_CASE("triangles are positively oriented with axis-aligned legs") {
  Mesh mesh = Mesh::build(unit_box(), 4);
  for (int t = 0; t < mesh.tri_count(); ++t) {
    int nodes[3];
    mesh.tri_nodes(t, nodes);
    Vec2 a = mesh.node_xy(nodes[0]), b = mesh.node_xy(nodes[1]),
         c = mesh.node_xy(nodes[2]);
    double cross = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    CHECK(cross > 0);
    CHECK(cross == doctest::Approx(2 * mesh.tri_area()));
  }
}

TEST_CASE("restricting to the full box pins exactly the boundary ring") {
  Mesh mesh = Mesh::build(unit_box(), 8);
  DofMap dofs = restrict_dofs(mesh, RasterDomain::full(unit_box(), 8));
  int fixed = mesh.node_count() - dofs.active_count();
  CHECK(fixed == 4 * 8);  // perimeter nodes
  for (int n : dofs.active_nodes()) {
    Vec2 p = mesh.node_xy(n);
    CHECK(p.x > 0);
    CHECK(p.x < 1);
    CHECK(p.y > 0);
    CHECK(p.y < 1);
  }
}

TEST_CASE("restricting to the empty domain pins everything") {
  Mesh mesh = Mesh::build(unit_box(), 8);
  DofMap dofs = restrict_dofs(mesh, RasterDomain::empty(unit_box(), 8));
  CHECK(dofs.active_count() == 0);
}

TEST_CASE("a hole pins its one-pixel dilation") {
  int res = 32;
  Mesh mesh = Mesh::build(unit_box(), res);
  RasterDomain d = RasterDomain::full(unit_box(), res);
  subtract_disk(d, {0.5, 0.5}, 0.2);
  DofMap dofs = restrict_dofs(mesh, d);
  // oracle: a node is fixed iff one of its adjacent pixels is outside
  for (int iy = 0; iy <= res; ++iy)
    for (int ix = 0; ix <= res; ++ix) {
      bool expect = false;
      for (int dy = -1; dy <= 0; ++dy)
        for (int dx = -1; dx <= 0; ++dx) {
          int px = ix + dx, py = iy + dy;
          if (px < 0 || px >= res || py < 0 || py >= res || !d.inside(px, py))
            expect = true;
        }
      CHECK(dofs.is_fixed(mesh.node_id(ix, iy)) == expect);
    }
}

TEST_CASE("dof restriction is monotone in the domain") {
  std::mt19937_64 rng(59);
  int res = 16;
  Mesh mesh = Mesh::build(unit_box(), res);
  std::bernoulli_distribution bit(0.7);
  for (int trial = 0; trial < 10; ++trial) {
    RasterDomain big(unit_box(), res);
    for (int iy = 0; iy < res; ++iy)
      for (int ix = 0; ix < res; ++ix) big.set(ix, iy, bit(rng));
    RasterDomain small = big;
    std::bernoulli_distribution drop(0.2);
    for (int iy = 0; iy < res; ++iy)
      for (int ix = 0; ix < res; ++ix)
        if (small.inside(ix, iy) && drop(rng)) small.set(ix, iy, false);
    DofMap d_big = restrict_dofs(mesh, big);
    DofMap d_small = restrict_dofs(mesh, small);
    for (int n = 0; n < mesh.node_count(); ++n)
      if (!d_small.is_fixed(n)) CHECK(!d_big.is_fixed(n));
  }
}

TEST_CASE("nodes inside the true complement stay fixed under refinement") {
  Vec2 c{0.5, 0.5};
  double r = 0.2;
  for (int res : {16, 32}) {
    Mesh mesh = Mesh::build(unit_box(), res);
    RasterDomain d = RasterDomain::full(unit_box(), res);
    subtract_disk(d, c, r);
    DofMap dofs = restrict_dofs(mesh, d);
    for (int n = 0; n < mesh.node_count(); ++n) {
      Vec2 p = mesh.node_xy(n);
      if ((p - c).norm() <= r) CHECK(dofs.is_fixed(n));
    }
  }
}

TEST_CASE("P1 gradients of affine fields are exact") {
  Mesh mesh = Mesh::build(unit_box(), 8);
  GridFunction u(mesh);
  for (int n = 0; n < mesh.node_count(); ++n) {
    Vec2 p = mesh.node_xy(n);
    u[n] = 1.5 + 2.0 * p.x - 0.75 * p.y;
  }
  FieldSample g = gradient(u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    CHECK(g.vx[k] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(g.vy[k] == doctest::Approx(-0.75).epsilon(1e-12));
  }

  GridFunction zero(mesh);
  FieldSample gz = gradient(zero);
  for (double v : gz.values) CHECK(v == 0.0);
}

TEST_CASE("hat function gradients match the hand computation") {
  int res = 4;
  Mesh mesh = Mesh::build(unit_box(), res);
  double h = mesh.h();
  int ci = 2, cj = 2;
  GridFunction hat(mesh);
  hat[mesh.node_id(ci, cj)] = 1.0;
  FieldSample g = gradient(hat);

  // the six incident triangles carry these gradients, all others zero
  std::multiset<std::pair<double, double>> expected = {
      {-1 / h, 0.0},    {0.0, -1 / h}, {1 / h, -1 / h},
      {0.0, 1 / h},     {1 / h, 0.0},  {-1 / h, 1 / h}};
  std::multiset<std::pair<double, double>> found;
  double dirichlet = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    if (g.values[t] != 0.0) {
      found.insert({g.vx[t], g.vy[t]});
      dirichlet += g.weights[t] * g.values[t] * g.values[t];
    }
  }
  CHECK(found == expected);
  CHECK(dirichlet == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("lumped weights sum to the box area") {
  Mesh mesh = Mesh::build({0, 0, 2, 1}, 4);
  double total = 0.0;
  for (int n = 0; n < mesh.node_count(); ++n) total += mesh.lumped_weight(n);
  CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
  // interior node weight equals one cell area
  CHECK(mesh.lumped_weight(mesh.node_id(3, 2)) ==
        doctest::Approx(mesh.h() * mesh.h()).epsilon(1e-12));
}

TEST_CASE("empirical Poincare constant stays at the domain scale") {
  Mesh mesh = Mesh::build(unit_box(), 16);
  DofMap dofs = box_interior_dofs(mesh);
  ExponentField p = constant_exponent(2.0);
  PoincareReport rep = poincare_check(mesh, dofs, p, 20);
  CHECK(rep.c_emp > 0.0);
  CHECK(rep.c_emp < std::sqrt(2.0));  // diameter of the unit square
  CHECK(rep.skipped == 0);
}

TEST_CASE("doubling the box doubles the Poincare ratio for p = 2") {
  // identical nodal values on geometrically scaled grids
  Mesh m1 = Mesh::build(unit_box(), 8);
  Mesh m2 = Mesh::build({0, 0, 2, 2}, 4);
  ExponentField p1 = constant_exponent(2.0, unit_box(), 8);
  ExponentField p2 = constant_exponent(2.0, {0, 0, 2, 2}, 4);
  std::mt19937_64 rng(61);
  GridFunction u1 = random_field(m1, rng);
  GridFunction u2(m2, u1.values());
  double r1 = luxemburg_norm(nodal_sample(u1), p1) / luxemburg_norm(gradient(u1), p1);
  double r2 = luxemburg_norm(nodal_sample(u2), p2) / luxemburg_norm(gradient(u2), p2);
  CHECK(r2 == doctest::Approx(2.0 * r1).epsilon(1e-9));
}

TEST_CASE("grid function exports") {
  Mesh mesh = Mesh::build(unit_box(), 4);
  GridFunction u(mesh, 1.0);
  auto dir = std::filesystem::temp_directory_path();
  auto csv = dir / "vexlap_u.csv";
  auto vtk = dir / "vexlap_u.vtk";
  write_csv(u, csv.string());
  write_vtk(u, vtk.string());
  CHECK(std::filesystem::file_size(csv) > 0);
  CHECK(std::filesystem::file_size(vtk) > 0);
  std::filesystem::remove(csv);
  std::filesystem::remove(vtk);
}
