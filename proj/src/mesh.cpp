#include "vexlap/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "vexlap/lebesgue.hpp"

namespace vexlap {

namespace {

int cells_along(double length, int resolution) {
  double exact = length * resolution;
  int n = static_cast<int>(std::llround(exact));
  if (n < 1 || std::abs(exact - n) > 1e-9 * std::max(1.0, exact)) {
    throw ResolutionMismatch("box side " + std::to_string(length) +
                             " is not an integer number of cells at resolution " +
                             std::to_string(resolution));
  }
  return n;
}

}  // namespace

Mesh::Mesh(Box box, int resolution) : box_(box), res_(resolution) {
  nx_ = cells_along(box.width(), resolution);
  ny_ = cells_along(box.height(), resolution);
  h_ = 1.0 / resolution;
}

Mesh Mesh::build(Box box, int resolution) {
  if (resolution < 2)
    throw PreconditionViolated("mesh resolution must be at least 2");
  return Mesh(box, resolution);
}

Mesh build_mesh(Box box, int resolution) { return Mesh::build(box, resolution); }

void Mesh::tri_nodes(int t, int out[3]) const {
  int cell = t / 2, k = t % 2;
  int i = cell % nx_, j = cell / nx_;
  int a = node_id(i, j);
  int b = node_id(i + 1, j);
  int c = node_id(i + 1, j + 1);
  int d = node_id(i, j + 1);
  if (k == 0) {
    out[0] = a;
    out[1] = b;
    out[2] = c;
  } else {
    out[0] = a;
    out[1] = c;
    out[2] = d;
  }
}

Vec2 Mesh::tri_barycenter(int t) const {
  int nodes[3];
  tri_nodes(t, nodes);
  Vec2 p0 = node_xy(nodes[0]), p1 = node_xy(nodes[1]), p2 = node_xy(nodes[2]);
  return {(p0.x + p1.x + p2.x) / 3.0, (p0.y + p1.y + p2.y) / 3.0};
}

void Mesh::tri_basis_gradients(int t, Vec2 g[3]) const {
  double ih = 1.0 / h_;
  if (t % 2 == 0) {
    g[0] = {-ih, 0.0};
    g[1] = {ih, -ih};
    g[2] = {0.0, ih};
  } else {
    g[0] = {0.0, -ih};
    g[1] = {ih, 0.0};
    g[2] = {-ih, ih};
  }
}

Vec2 Mesh::tri_gradient(std::span<const double> nodal, int t) const {
  int nodes[3];
  tri_nodes(t, nodes);
  double ih = 1.0 / h_;
  if (t % 2 == 0) {
    // legs along x then y: grad = ((uB-uA)/h, (uC-uB)/h)
    return {(nodal[nodes[1]] - nodal[nodes[0]]) * ih,
            (nodal[nodes[2]] - nodal[nodes[1]]) * ih};
  }
  // second half: grad = ((uC-uD)/h, (uD-uA)/h)
  return {(nodal[nodes[1]] - nodal[nodes[2]]) * ih,
          (nodal[nodes[2]] - nodal[nodes[0]]) * ih};
}

double Mesh::lumped_weight(int node) const {
  int ix = node % (nx_ + 1), iy = node / (nx_ + 1);
  int tris = 0;
  // cell (ix, iy): node is the lower-left corner, member of both triangles
  if (ix < nx_ && iy < ny_) tris += 2;
  // cell (ix-1, iy): lower-right corner, member of the first triangle only
  if (ix > 0 && iy < ny_) tris += 1;
  // cell (ix-1, iy-1): upper-right corner, member of both
  if (ix > 0 && iy > 0) tris += 2;
  // cell (ix, iy-1): upper-left corner, member of the second only
  if (ix < nx_ && iy > 0) tris += 1;
  return tris * tri_area() / 3.0;
}

DofMap::DofMap(const Mesh& mesh, std::vector<std::uint8_t> fixed)
    : fixed_(std::move(fixed)) {
  active_index_.assign(fixed_.size(), -1);
  for (std::size_t n = 0; n < fixed_.size(); ++n) {
    if (!fixed_[n]) {
      active_index_[n] = static_cast<int>(active_.size());
      active_.push_back(static_cast<int>(n));
    }
  }
  (void)mesh;
}

DofMap restrict_dofs(const Mesh& mesh, const RasterDomain& o) {
  if (!mesh.matches(o))
    throw ResolutionMismatch("mesh and domain gridding disagree");
  int nx = mesh.nx(), ny = mesh.ny();
  std::vector<std::uint8_t> fixed(mesh.node_count(), 0);
  for (int iy = 0; iy <= ny; ++iy) {
    for (int ix = 0; ix <= nx; ++ix) {
      bool fix = false;
      for (int dy = -1; dy <= 0 && !fix; ++dy) {
        for (int dx = -1; dx <= 0 && !fix; ++dx) {
          int px = ix + dx, py = iy + dy;
          if (px < 0 || px >= nx || py < 0 || py >= ny) {
            fix = true;  // outside the box counts as complement
          } else if (!o.inside(px, py)) {
            fix = true;
          }
        }
      }
      fixed[mesh.node_id(ix, iy)] = fix ? 1 : 0;
    }
  }
  return {mesh, std::move(fixed)};
}

DofMap box_interior_dofs(const Mesh& mesh) {
  int nx = mesh.nx(), ny = mesh.ny();
  std::vector<std::uint8_t> fixed(mesh.node_count(), 0);
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      fixed[mesh.node_id(ix, iy)] =
          (ix == 0 || ix == nx || iy == 0 || iy == ny) ? 1 : 0;
  return {mesh, std::move(fixed)};
}

GridFunction::GridFunction(const Mesh& mesh, std::vector<double> values)
    : mesh_(&mesh), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != mesh.node_count())
    throw ResolutionMismatch("nodal value count does not match the mesh");
}

void GridFunction::apply_zero(const DofMap& dofs) {
  for (int n = 0; n < static_cast<int>(v_.size()); ++n)
    if (dofs.is_fixed(n)) v_[n] = 0.0;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double GridFunction::min_value() const {
  return *std::min_element(v_.begin(), v_.end());
}

double GridFunction::max_value() const {
  return *std::max_element(v_.begin(), v_.end());
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] -= b[k];
  return r;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  GridFunction r = a;
  for (std::size_t k = 0; k < r.values().size(); ++k) r.values()[k] += b[k];
  return r;
}

GridFunction operator*(double s, const GridFunction& a) {
  GridFunction r = a;
  for (double& v : r.values()) v *= s;
  return r;
}

FieldSample gradient(const GridFunction& u) {
  const Mesh& mesh = u.mesh();
  FieldSample f;
  int nt = mesh.tri_count();
  f.points.reserve(nt);
  f.values.reserve(nt);
  f.weights.assign(nt, mesh.tri_area());
  f.vx.reserve(nt);
  f.vy.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    Vec2 g = mesh.tri_gradient(u.values(), t);
    f.points.push_back(mesh.tri_barycenter(t));
    f.values.push_back(g.norm());
    f.vx.push_back(g.x);
    f.vy.push_back(g.y);
  }
  f.region_measure = mesh.box().area();
  return f;
}

FieldSample gradient_difference(const GridFunction& u, const GridFunction& v) {
  if (!u.mesh().same_grid(v.mesh()))
    throw IncompatibleSampling("gradient difference of mismatched meshes");
  const Mesh& mesh = u.mesh();
  FieldSample f;
  int nt = mesh.tri_count();
  f.weights.assign(nt, mesh.tri_area());
  f.points.reserve(nt);
  f.values.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    Vec2 g = mesh.tri_gradient(u.values(), t) - mesh.tri_gradient(v.values(), t);
    f.points.push_back(mesh.tri_barycenter(t));
    f.values.push_back(g.norm());
  }
  f.region_measure = mesh.box().area();
  return f;
}

FieldSample nodal_sample(const GridFunction& u) {
  const Mesh& mesh = u.mesh();
  FieldSample f;
  int nn = mesh.node_count();
  f.points.reserve(nn);
  f.values.reserve(nn);
  f.weights.reserve(nn);
  for (int n = 0; n < nn; ++n) {
    f.points.push_back(mesh.node_xy(n));
    f.values.push_back(u[n]);
    f.weights.push_back(mesh.lumped_weight(n));
  }
  f.region_measure = mesh.box().area();
  return f;
}

PoincareReport poincare_check(const Mesh& mesh, const DofMap& dofs,
                              const ExponentField& p, int trials,
                              std::uint64_t seed) {
  if (dofs.active_count() == 0)
    throw NoActiveDofs("Poincare check needs at least one active dof");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  PoincareReport rep;
  rep.trials = trials;
  for (int k = 0; k < trials; ++k) {
    GridFunction u(mesh);
    for (int n : dofs.active_nodes()) u[n] = uni(rng);
    double gnorm = luxemburg_norm(gradient(u), p);
    if (gnorm == 0.0) {
      ++rep.skipped;
      continue;
    }
    double unorm = luxemburg_norm(nodal_sample(u), p);
    rep.c_emp = std::max(rep.c_emp, unorm / gnorm);
  }
  return rep;
}

// ---- export -------------------------------------------------------------------

void write_csv(const GridFunction& u, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "'");
  out << "x,y,value\n";
  char line[96];
  for (int n = 0; n < u.mesh().node_count(); ++n) {
    Vec2 p = u.mesh().node_xy(n);
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.x, p.y, u[n]);
    out << line;
  }
}

void write_values_csv(const std::vector<double>& values, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "'");
  out << "index,value\n";
  char line[64];
  for (std::size_t k = 0; k < values.size(); ++k) {
    std::snprintf(line, sizeof line, "%zu,%.17g\n", k, values[k]);
    out << line;
  }
}

void write_vtk(const GridFunction& u, const std::string& path,
               const std::string& field_name) {
  const Mesh& mesh = u.mesh();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "'");
  out << "# vtk DataFile Version 3.0\nvexlap field\nASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.node_count() << " double\n";
  char line[120];
  for (int n = 0; n < mesh.node_count(); ++n) {
    Vec2 p = mesh.node_xy(n);
    std::snprintf(line, sizeof line, "%.17g %.17g 0\n", p.x, p.y);
    out << line;
  }
  out << "CELLS " << mesh.tri_count() << " " << 4 * mesh.tri_count() << "\n";
  for (int t = 0; t < mesh.tri_count(); ++t) {
    int nodes[3];
    mesh.tri_nodes(t, nodes);
    out << "3 " << nodes[0] << " " << nodes[1] << " " << nodes[2] << "\n";
  }
  out << "CELL_TYPES " << mesh.tri_count() << "\n";
  for (int t = 0; t < mesh.tri_count(); ++t) out << "5\n";
  out << "POINT_DATA " << mesh.node_count() << "\n";
  out << "SCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
  for (int n = 0; n < mesh.node_count(); ++n) {
    std::snprintf(line, sizeof line, "%.17g\n", u[n]);
    out << line;
  }
}

bool FieldSample::validate() const {
  if (values.size() != weights.size() || values.size() != points.size()) return false;
  if (!vx.empty() && (vx.size() != values.size() || vy.size() != values.size()))
    return false;
  CompensatedSum sum;
  for (double w : weights) {
    if (!(w > 0)) return false;
    sum.add(w);
  }
  double total = sum.value();
  return std::abs(total - region_measure) <= 1e-10 * std::max(1.0, region_measure);
}

}  // namespace vexlap
