#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vexlap/errors.hpp"
#include "vexlap/exponent.hpp"
#include "vexlap/field_sample.hpp"
#include "vexlap/geometry.hpp"
#include "vexlap/numeric.hpp"

namespace vexlap {

/// Uniform right-isosceles triangulation of a box.  Cell (i, j) is split
/// along the diagonal from its lower-left to its upper-right corner, so
/// every triangle has axis-aligned legs; for p = 2 the assembled stiffness
/// matrix is the 5-point stencil and a discrete maximum principle holds.
class Mesh {
 public:
  static Mesh build(Box box, int resolution);

  const Box& box() const { return box_; }
  int resolution() const { return res_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int tri_count() const { return 2 * nx_ * ny_; }

  int node_id(int ix, int iy) const { return iy * (nx_ + 1) + ix; }
  Vec2 node_xy(int node) const {
    int ix = node % (nx_ + 1), iy = node / (nx_ + 1);
    return {box_.x0 + ix * h_, box_.y0 + iy * h_};
  }

  /// Nodes of triangle t, counterclockwise.  Triangles 2*c and 2*c+1 live in
  /// cell c = j*nx + i.
  void tri_nodes(int t, int out[3]) const;
  Vec2 tri_barycenter(int t) const;
  double tri_area() const { return 0.5 * h_ * h_; }

  /// P1 gradient of a nodal field on triangle t (constant per element).
  Vec2 tri_gradient(std::span<const double> nodal, int t) const;

  /// Row of the local basis gradients for triangle t: g[k] = grad phi_k.
  void tri_basis_gradients(int t, Vec2 g[3]) const;

  /// Lumped quadrature weight of a node (one third of the area of its
  /// incident triangles).
  double lumped_weight(int node) const;

  bool same_grid(const Mesh& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && box_.same_as(o.box_);
  }
  bool matches(const RasterDomain& o) const {
    return nx_ == o.nx() && ny_ == o.ny() && box_.same_as(o.box());
  }
  bool matches(const ExponentField& p) const {
    return nx_ == p.nx() && ny_ == p.ny() && box_.same_as(p.box());
  }

 private:
  Mesh(Box box, int resolution);

  Box box_;
  int res_;
  int nx_, ny_;
  double h_;
};

Mesh build_mesh(Box box, int resolution);

/// Partition of the mesh nodes into free unknowns and nodes pinned to zero.
class DofMap {
 public:
  DofMap(const Mesh& mesh, std::vector<std::uint8_t> fixed);

  bool is_fixed(int node) const { return fixed_[node] != 0; }
  int active_count() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active_nodes() const { return active_; }
  /// Index of a node among the active unknowns, -1 if fixed.
  int active_index(int node) const { return active_index_[node]; }
  int node_count() const { return static_cast<int>(fixed_.size()); }

 private:
  std::vector<std::uint8_t> fixed_;
  std::vector<int> active_;
  std::vector<int> active_index_;
};

/// Conservative discrete encoding of the zero boundary condition: a node is
/// pinned whenever one of its adjacent pixels (or the outside of the box)
/// meets the complement of the domain.
DofMap restrict_dofs(const Mesh& mesh, const RasterDomain& o);

/// DofMap of the full box: only box-boundary nodes are pinned.
DofMap box_interior_dofs(const Mesh& mesh);

/// Nodal scalar field on a mesh.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(const Mesh& mesh, double fill = 0.0)
      : mesh_(&mesh), v_(mesh.node_count(), fill) {}
  GridFunction(const Mesh& mesh, std::vector<double> values);

  const Mesh& mesh() const { return *mesh_; }
  bool empty() const { return mesh_ == nullptr; }

  double operator[](int node) const { return v_[node]; }
  double& operator[](int node) { return v_[node]; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }

  /// Enforce exact zeros on the fixed set.
  void apply_zero(const DofMap& dofs);

  double max_abs() const;
  double min_value() const;
  double max_value() const;

 private:
  const Mesh* mesh_ = nullptr;
  std::vector<double> v_;
};

GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);

/// Elementwise-constant gradient with triangle-area weights; `values` holds
/// the magnitudes and vx/vy the components.
FieldSample gradient(const GridFunction& u);

/// Difference of two gradients as a single sample, |grad u - grad v|.
FieldSample gradient_difference(const GridFunction& u, const GridFunction& v);

/// Nodal values under vertex-based lumped quadrature.
FieldSample nodal_sample(const GridFunction& u);

struct PoincareReport {
  double c_emp = 0.0;  // max over trials of ||u|| / ||grad u||
  int trials = 0;
  int skipped = 0;  // zero fields excluded from the max
};

/// Empirical Poincare constant over seeded random active-dof functions.
PoincareReport poincare_check(const Mesh& mesh, const DofMap& dofs,
                              const ExponentField& p, int trials,
                              std::uint64_t seed = 20240915);

// ---- export ----------------------------------------------------------------

/// CSV rows "x,y,value".
void write_csv(const GridFunction& u, const std::string& path);
/// CSV rows "index,value".
void write_values_csv(const std::vector<double>& values, const std::string& path);
/// Legacy ASCII VTK unstructured grid with one point scalar field.
void write_vtk(const GridFunction& u, const std::string& path,
               const std::string& field_name = "u");

}  // namespace vexlap
