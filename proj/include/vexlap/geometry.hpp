#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vexlap/errors.hpp"
#include "vexlap/numeric.hpp"

namespace vexlap {

/// How analytic shapes are turned into pixel sets.
///
/// Interior keeps a pixel only when its closed square lies inside the open
/// set, so the mask is a conservative inner approximation (boundary pixels
/// excluded).  Center keeps a pixel when its center belongs to the (closed)
/// set; used for compact constraint sets where no one-sided bias is wanted.
enum class RasterMode { Interior, Center };

/// An open subset of a rectangular box, stored as a boolean pixel mask.
/// Pixel (ix, iy) covers [x0+ix*h, x0+(ix+1)*h] x [y0+iy*h, y0+(iy+1)*h]
/// with h = 1/resolution.
class RasterDomain {
 public:
  RasterDomain(Box box, int resolution);

  static RasterDomain full(Box box, int resolution);
  static RasterDomain empty(Box box, int resolution) { return {box, resolution}; }

  const Box& box() const { return box_; }
  int resolution() const { return res_; }
  double pixel_size() const { return 1.0 / res_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  bool inside(int ix, int iy) const { return mask_[idx(ix, iy)] != 0; }
  void set(int ix, int iy, bool v) { mask_[idx(ix, iy)] = v ? 1 : 0; }
  Vec2 pixel_center(int ix, int iy) const {
    double h = pixel_size();
    return {box_.x0 + (ix + 0.5) * h, box_.y0 + (iy + 0.5) * h};
  }

  long long inside_count() const;
  bool is_empty() const { return inside_count() == 0; }
  bool same_grid(const RasterDomain& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && res_ == o.res_ && box_.same_as(o.box_);
  }

  const std::vector<std::uint8_t>& mask() const { return mask_; }
  std::vector<std::uint8_t>& mask() { return mask_; }

 private:
  std::size_t idx(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx_ + ix;
  }

  Box box_;
  int res_;
  int nx_, ny_;
  std::vector<std::uint8_t> mask_;
};

// ---- shape rasterizers -----------------------------------------------------

RasterDomain rasterize_disk(Box box, int resolution, Vec2 center, double radius,
                            RasterMode mode = RasterMode::Interior);
RasterDomain rasterize_rect(Box box, int resolution, Box rect,
                            RasterMode mode = RasterMode::Interior);
/// Convex polygon given by CCW vertices.
RasterDomain rasterize_convex_polygon(Box box, int resolution,
                                      const std::vector<Vec2>& vertices,
                                      RasterMode mode = RasterMode::Interior);

/// Pixelwise union / difference on a shared grid.
RasterDomain domain_union(const RasterDomain& a, const RasterDomain& b);
RasterDomain domain_difference(const RasterDomain& a, const RasterDomain& b);
/// Removes from `a` every pixel meeting the closed disk.
void subtract_disk(RasterDomain& a, Vec2 center, double radius);
/// Removes from `a` every pixel meeting the closed segment [p, q].
void subtract_segment(RasterDomain& a, Vec2 p, Vec2 q);

// ---- metric and topology ---------------------------------------------------

/// Hausdorff distance between the complements of two domains on the same
/// grid, complements taken within the closed box (the box boundary always
/// belongs to both complements).  Computed with two exact Euclidean distance
/// transforms; agrees with the brute-force pixel-pair definition exactly.
double hausdorff_complementary_distance(const RasterDomain& a, const RasterDomain& b);

/// Exact squared Euclidean distance transform on an augmented grid that
/// includes a one-pixel complement frame around the box.  Exposed for the
/// geometry tests; distances are in pixel units, squared, per pixel of the
/// (nx+2) x (ny+2) augmented grid.
std::vector<std::int64_t> complement_distance_transform(const RasterDomain& a);

enum class Connectivity { Four, Eight };

/// Connected components of an arbitrary pixel mask.
int component_count(const std::vector<std::uint8_t>& mask, int nx, int ny,
                    Connectivity conn);

/// Number of connected components of the complement within the closed box.
/// The boundary ring of the box is part of the complement, so a domain that
/// fills the whole box still reports one component.  8-connectivity.
int complement_components(const RasterDomain& o);

/// Components of the domain itself (4-connectivity).
int domain_components(const RasterDomain& o);

// ---- perforated square -----------------------------------------------------

/// Unit square minus (n-1)^2 closed disks of radius n^-2 centered at the
/// interior lattice points (i/n, j/n).
RasterDomain cioranescu_murat_domain(int n, int resolution);

// ---- domain sequences ------------------------------------------------------

struct DomainSpec {
  enum class Kind { Full, Disk, Square } kind = Kind::Full;
  double radius = 0.4;  // Disk radius or Square side

  static DomainSpec parse(const std::string& text);
  std::string str() const;
};

RasterDomain make_domain(const DomainSpec& spec, Box box, int resolution);

struct GeneratorSpec {
  enum class Kind {
    PolygonExhaustion,  // inscribed regular n-gons of a disk
    ShrinkingCrack,     // square minus a segment of length l0/n
    Perforated,         // cioranescu_murat_domain(n)
    TranslatedHole,     // square minus a disk displaced by d0/n
    Appendage,          // base square plus a square appendage of side s0/n
    NestedSquares,      // centered squares shrinking onto a limit square
    Constant,           // the same domain for every n
  };

  Kind kind = Kind::Constant;
  std::vector<double> params;
  DomainSpec base;  // used by Constant

  static GeneratorSpec parse(const std::string& text);
  std::string str() const;
};

/// Deterministic n-th element of the sequence.
RasterDomain domain_sequence(const GeneratorSpec& spec, int n, int resolution);
/// The Hausdorff-complementary limit of the sequence, at the same resolution.
/// Perforated sequences converge to the empty set.
RasterDomain limit_domain(const GeneratorSpec& spec, int resolution);

// ---- serialization ---------------------------------------------------------

/// Binary PGM (P5, maxval 1, 1 = inside).  A header comment records box and
/// resolution so masks round-trip; files without it default to a unit-width
/// box with resolution = nx.
void write_pgm(const RasterDomain& o, const std::string& path);
RasterDomain read_pgm(const std::string& path);

/// Run-length encoded JSON (row-major runs, alternating outside/inside,
/// starting with outside).
std::string to_rle_json(const RasterDomain& o);
RasterDomain from_rle_json(const std::string& text);

}  // namespace vexlap
