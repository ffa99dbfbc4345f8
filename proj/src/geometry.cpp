#include "vexlap/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <deque>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vexlap {

namespace {

int pixels_along(double length, int resolution) {
  double exact = length * resolution;
  int n = static_cast<int>(std::llround(exact));
  if (n < 1 || std::abs(exact - n) > 1e-9 * std::max(1.0, exact)) {
    throw ResolutionMismatch("box side " + std::to_string(length) +
                             " is not an integer number of pixels at resolution " +
                             std::to_string(resolution));
  }
  return n;
}

// Distance from a point to the closed pixel square (0 if inside).
double dist_point_to_rect(Vec2 p, double rx0, double ry0, double rx1, double ry1) {
  double dx = std::max({rx0 - p.x, 0.0, p.x - rx1});
  double dy = std::max({ry0 - p.y, 0.0, p.y - ry1});
  return std::hypot(dx, dy);
}

// Farthest corner of the pixel square from a point.
double maxdist_point_to_rect(Vec2 p, double rx0, double ry0, double rx1, double ry1) {
  double dx = std::max(std::abs(p.x - rx0), std::abs(p.x - rx1));
  double dy = std::max(std::abs(p.y - ry0), std::abs(p.y - ry1));
  return std::hypot(dx, dy);
}

double dist_point_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  Vec2 ab = b - a;
  double denom = ab.norm2();
  double t = denom > 0 ? std::clamp((p - a).dot(ab) / denom, 0.0, 1.0) : 0.0;
  Vec2 proj = a + t * ab;
  return (p - proj).norm();
}

}  // namespace

RasterDomain::RasterDomain(Box box, int resolution) : box_(box), res_(resolution) {
  if (resolution < 1) throw Error("resolution must be positive");
  if (box.width() <= 0 || box.height() <= 0) throw Error("degenerate box");
  nx_ = pixels_along(box.width(), resolution);
  ny_ = pixels_along(box.height(), resolution);
  mask_.assign(static_cast<std::size_t>(nx_) * ny_, 0);
}

RasterDomain RasterDomain::full(Box box, int resolution) {
  RasterDomain d(box, resolution);
  std::fill(d.mask_.begin(), d.mask_.end(), 1);
  return d;
}

long long RasterDomain::inside_count() const {
  long long c = 0;
  for (auto v : mask_) c += v;
  return c;
}

// ---- rasterizers ------------------------------------------------------------

RasterDomain rasterize_disk(Box box, int resolution, Vec2 center, double radius,
                            RasterMode mode) {
  RasterDomain d(box, resolution);
  double h = d.pixel_size();
  for (int iy = 0; iy < d.ny(); ++iy) {
    for (int ix = 0; ix < d.nx(); ++ix) {
      Vec2 c = d.pixel_center(ix, iy);
      bool in;
      if (mode == RasterMode::Interior) {
        in = maxdist_point_to_rect(center, c.x - h / 2, c.y - h / 2, c.x + h / 2,
                                   c.y + h / 2) < radius;
      } else {
        in = (c - center).norm() <= radius;
      }
      d.set(ix, iy, in);
    }
  }
  return d;
}

RasterDomain rasterize_rect(Box box, int resolution, Box rect, RasterMode mode) {
  RasterDomain d(box, resolution);
  double h = d.pixel_size();
  for (int iy = 0; iy < d.ny(); ++iy) {
    for (int ix = 0; ix < d.nx(); ++ix) {
      Vec2 c = d.pixel_center(ix, iy);
      bool in;
      if (mode == RasterMode::Interior) {
        in = c.x - h / 2 > rect.x0 && c.x + h / 2 < rect.x1 &&
             c.y - h / 2 > rect.y0 && c.y + h / 2 < rect.y1;
      } else {
        in = rect.contains(c);
      }
      d.set(ix, iy, in);
    }
  }
  return d;
}

RasterDomain rasterize_convex_polygon(Box box, int resolution,
                                      const std::vector<Vec2>& vertices,
                                      RasterMode mode) {
  if (vertices.size() < 3) throw Error("polygon needs at least 3 vertices");
  RasterDomain d(box, resolution);
  double h = d.pixel_size();
  auto strictly_inside = [&](Vec2 p) {
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      Vec2 a = vertices[i], b = vertices[(i + 1) % vertices.size()];
      double cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
      if (cross <= 0) return false;  // CCW polygon, strict interior
    }
    return true;
  };
  for (int iy = 0; iy < d.ny(); ++iy) {
    for (int ix = 0; ix < d.nx(); ++ix) {
      Vec2 c = d.pixel_center(ix, iy);
      bool in;
      if (mode == RasterMode::Interior) {
        in = strictly_inside({c.x - h / 2, c.y - h / 2}) &&
             strictly_inside({c.x + h / 2, c.y - h / 2}) &&
             strictly_inside({c.x + h / 2, c.y + h / 2}) &&
             strictly_inside({c.x - h / 2, c.y + h / 2});
      } else {
        in = strictly_inside(c);
      }
      d.set(ix, iy, in);
    }
  }
  return d;
}

RasterDomain domain_union(const RasterDomain& a, const RasterDomain& b) {
  if (!a.same_grid(b)) throw ResolutionMismatch("union of mismatched grids");
  RasterDomain r = a;
  for (std::size_t k = 0; k < r.mask().size(); ++k)
    r.mask()[k] = a.mask()[k] | b.mask()[k];
  return r;
}

RasterDomain domain_difference(const RasterDomain& a, const RasterDomain& b) {
  if (!a.same_grid(b)) throw ResolutionMismatch("difference of mismatched grids");
  RasterDomain r = a;
  for (std::size_t k = 0; k < r.mask().size(); ++k)
    r.mask()[k] = a.mask()[k] & static_cast<std::uint8_t>(!b.mask()[k]);
  return r;
}

void subtract_disk(RasterDomain& a, Vec2 center, double radius) {
  double h = a.pixel_size();
  for (int iy = 0; iy < a.ny(); ++iy) {
    for (int ix = 0; ix < a.nx(); ++ix) {
      if (!a.inside(ix, iy)) continue;
      Vec2 c = a.pixel_center(ix, iy);
      if (dist_point_to_rect(center, c.x - h / 2, c.y - h / 2, c.x + h / 2,
                             c.y + h / 2) <= radius) {
        a.set(ix, iy, false);
      }
    }
  }
}

void subtract_segment(RasterDomain& a, Vec2 p, Vec2 q) {
  double h = a.pixel_size();
  double half_diag = h * std::sqrt(0.5);
  for (int iy = 0; iy < a.ny(); ++iy) {
    for (int ix = 0; ix < a.nx(); ++ix) {
      if (!a.inside(ix, iy)) continue;
      Vec2 c = a.pixel_center(ix, iy);
      // quick reject, then exact segment-square test
      if (dist_point_to_segment(c, p, q) > half_diag + 1e-12) continue;
      double rx0 = c.x - h / 2, ry0 = c.y - h / 2, rx1 = c.x + h / 2, ry1 = c.y + h / 2;
      // the segment meets the square iff some point of it is within the square;
      // sample the closest point of the segment to the square center and ends
      bool hit = false;
      for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        Vec2 s = p + t * (q - p);
        if (s.x >= rx0 && s.x <= rx1 && s.y >= ry0 && s.y <= ry1) hit = true;
      }
      if (!hit) {
        // robust fallback: distance from square center to segment below half
        // diagonal means a corner-accurate test is needed
        Vec2 corners[4] = {{rx0, ry0}, {rx1, ry0}, {rx1, ry1}, {rx0, ry1}};
        for (int k = 0; k < 4 && !hit; ++k) {
          Vec2 e0 = corners[k], e1 = corners[(k + 1) % 4];
          // segment-segment intersection test
          auto orient = [](Vec2 a2, Vec2 b2, Vec2 c2) {
            double v = (b2.x - a2.x) * (c2.y - a2.y) - (b2.y - a2.y) * (c2.x - a2.x);
            return (v > 0) - (v < 0);
          };
          int o1 = orient(p, q, e0), o2 = orient(p, q, e1);
          int o3 = orient(e0, e1, p), o4 = orient(e0, e1, q);
          if (o1 != o2 && o3 != o4) hit = true;
        }
      }
      if (hit) a.set(ix, iy, false);
    }
  }
}

// ---- distance transform ------------------------------------------------------

namespace {

constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

// 1D squared distance transform (Felzenszwalb-Huttenlocher lower envelope).
void edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
            std::vector<int>& v, std::vector<double>& z) {
  int n = static_cast<int>(f.size());
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    if (f[q] >= kFar) continue;
    if (f[v[k]] >= kFar) {
      v[k] = q;
      continue;
    }
    double s;
    while (true) {
      int p = v[k];
      s = (static_cast<double>(f[q] - f[p]) +
           (static_cast<double>(q) * q - static_cast<double>(p) * p)) /
          (2.0 * (q - p));
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    if (f[v[0]] >= kFar) {
      out[q] = kFar;
      continue;
    }
    while (z[k + 1] < q) ++k;
    std::int64_t d = q - v[k];
    out[q] = d * d + f[v[k]];
  }
}

// Exact squared EDT of a site mask (site = nonzero), distances in pixels.
std::vector<std::int64_t> squared_edt(const std::vector<std::uint8_t>& sites,
                                      int nx, int ny) {
  std::vector<std::int64_t> g(static_cast<std::size_t>(nx) * ny);
  // columns first
  {
    std::vector<std::int64_t> f(ny), out(ny);
    std::vector<int> v;
    std::vector<double> z;
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y)
        f[y] = sites[static_cast<std::size_t>(y) * nx + x] ? 0 : kFar;
      edt_1d(f, out, v, z);
      for (int y = 0; y < ny; ++y) g[static_cast<std::size_t>(y) * nx + x] = out[y];
    }
  }
  // then rows
  {
    std::vector<std::int64_t> f(nx), out(nx);
    std::vector<int> v;
    std::vector<double> z;
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) f[x] = g[static_cast<std::size_t>(y) * nx + x];
      edt_1d(f, out, v, z);
      for (int x = 0; x < nx; ++x) g[static_cast<std::size_t>(y) * nx + x] = out[x];
    }
  }
  // snap to exact integers (the envelope is selected with doubles, the
  // evaluation is integer arithmetic already)
  return g;
}

// Complement mask on the augmented (nx+2) x (ny+2) grid whose outer frame
// stands for the box boundary ring.
std::vector<std::uint8_t> augmented_complement(const RasterDomain& a) {
  int nx = a.nx() + 2, ny = a.ny() + 2;
  std::vector<std::uint8_t> m(static_cast<std::size_t>(nx) * ny, 1);
  for (int iy = 0; iy < a.ny(); ++iy)
    for (int ix = 0; ix < a.nx(); ++ix)
      m[static_cast<std::size_t>(iy + 1) * nx + (ix + 1)] =
          a.inside(ix, iy) ? 0 : 1;
  return m;
}

}  // namespace

std::vector<std::int64_t> complement_distance_transform(const RasterDomain& a) {
  auto comp = augmented_complement(a);
  return squared_edt(comp, a.nx() + 2, a.ny() + 2);
}

double hausdorff_complementary_distance(const RasterDomain& a, const RasterDomain& b) {
  if (!a.same_grid(b)) throw ResolutionMismatch("Hausdorff distance needs one grid");
  int nx = a.nx() + 2, ny = a.ny() + 2;
  auto ca = augmented_complement(a);
  auto cb = augmented_complement(b);
  auto da = squared_edt(ca, nx, ny);
  auto db = squared_edt(cb, nx, ny);
  std::int64_t worst = 0;
  for (std::size_t k = 0; k < ca.size(); ++k) {
    if (ca[k] && db[k] > worst) worst = db[k];
    if (cb[k] && da[k] > worst) worst = da[k];
  }
  return std::sqrt(static_cast<double>(worst)) * a.pixel_size();
}

// ---- components --------------------------------------------------------------

int component_count(const std::vector<std::uint8_t>& mask, int nx, int ny,
                    Connectivity conn) {
  std::vector<std::uint8_t> seen(mask.size(), 0);
  std::deque<int> queue;
  int count = 0;
  const int dx4[] = {1, -1, 0, 0}, dy4[] = {0, 0, 1, -1};
  const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1}, dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int* dx = conn == Connectivity::Four ? dx4 : dx8;
  const int* dy = conn == Connectivity::Four ? dy4 : dy8;
  int nn = conn == Connectivity::Four ? 4 : 8;
  for (int start = 0; start < nx * ny; ++start) {
    if (!mask[start] || seen[start]) continue;
    ++count;
    seen[start] = 1;
    queue.push_back(start);
    while (!queue.empty()) {
      int cur = queue.front();
      queue.pop_front();
      int cx = cur % nx, cy = cur / nx;
      for (int k = 0; k < nn; ++k) {
        int x = cx + dx[k], y = cy + dy[k];
        if (x < 0 || x >= nx || y < 0 || y >= ny) continue;
        int id = y * nx + x;
        if (mask[id] && !seen[id]) {
          seen[id] = 1;
          queue.push_back(id);
        }
      }
    }
  }
  return count;
}

int complement_components(const RasterDomain& o) {
  auto comp = augmented_complement(o);
  return component_count(comp, o.nx() + 2, o.ny() + 2, Connectivity::Eight);
}

int domain_components(const RasterDomain& o) {
  return component_count(o.mask(), o.nx(), o.ny(), Connectivity::Four);
}

// ---- perforated square --------------------------------------------------------

RasterDomain cioranescu_murat_domain(int n, int resolution) {
  if (n < 2) throw PreconditionViolated("perforated domain needs n >= 2");
  double r = 1.0 / (static_cast<double>(n) * n);
  if (r < 2.0 / resolution) {
    throw ResolutionTooCoarse("hole radius " + std::to_string(r) +
                              " is below 2 pixels at resolution " +
                              std::to_string(resolution));
  }
  RasterDomain d = RasterDomain::full(unit_box(), resolution);
  for (int i = 1; i <= n - 1; ++i) {
    for (int j = 1; j <= n - 1; ++j) {
      subtract_disk(d, {static_cast<double>(i) / n, static_cast<double>(j) / n}, r);
    }
  }
  return d;
}

// ---- specs --------------------------------------------------------------------

namespace {

// name(arg, arg, ...) with numeric or bare-word arguments
struct Call {
  std::string name;
  std::vector<std::string> args;
};

Call parse_call(const std::string& text) {
  Call c;
  auto open = text.find('(');
  if (open == std::string::npos) {
    c.name = text;
  } else {
    auto close = text.rfind(')');
    if (close == std::string::npos || close < open)
      throw ConfigError("unbalanced parentheses in '" + text + "'");
    c.name = text.substr(0, open);
    std::string inner = text.substr(open + 1, close - open - 1);
    int depth = 0;
    std::string cur;
    for (char ch : inner) {
      if (ch == '(') ++depth;
      if (ch == ')') --depth;
      if (ch == ',' && depth == 0) {
        c.args.push_back(cur);
        cur.clear();
      } else {
        cur += ch;
      }
    }
    if (!cur.empty()) c.args.push_back(cur);
  }
  auto strip = [](std::string& s) {
    auto b = s.find_first_not_of(" \t");
    auto e = s.find_last_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
  };
  strip(c.name);
  for (auto& a : c.args) strip(a);
  return c;
}

double arg_number(const Call& c, std::size_t i) {
  if (i >= c.args.size())
    throw ConfigError("descriptor '" + c.name + "' is missing argument " +
                      std::to_string(i + 1));
  try {
    return std::stod(c.args[i]);
  } catch (const std::exception&) {
    throw ConfigError("bad number '" + c.args[i] + "' in '" + c.name + "'");
  }
}

}  // namespace

DomainSpec DomainSpec::parse(const std::string& text) {
  Call c = parse_call(text);
  DomainSpec s;
  if (c.name == "full") {
    s.kind = Kind::Full;
  } else if (c.name == "disk") {
    s.kind = Kind::Disk;
    s.radius = arg_number(c, 0);
  } else if (c.name == "square") {
    s.kind = Kind::Square;
    s.radius = arg_number(c, 0);
  } else {
    throw UnknownGenerator("unknown domain '" + text + "'");
  }
  return s;
}

std::string DomainSpec::str() const {
  char buf[64];
  switch (kind) {
    case Kind::Full:
      return "full";
    case Kind::Disk:
      std::snprintf(buf, sizeof buf, "disk(%g)", radius);
      return buf;
    case Kind::Square:
      std::snprintf(buf, sizeof buf, "square(%g)", radius);
      return buf;
  }
  return "full";
}

RasterDomain make_domain(const DomainSpec& spec, Box box, int resolution) {
  switch (spec.kind) {
    case DomainSpec::Kind::Full:
      return RasterDomain::full(box, resolution);
    case DomainSpec::Kind::Disk:
      return rasterize_disk(box, resolution, box.center(), spec.radius);
    case DomainSpec::Kind::Square: {
      Vec2 c = box.center();
      double a = spec.radius / 2;
      return rasterize_rect(box, resolution, {c.x - a, c.y - a, c.x + a, c.y + a});
    }
  }
  throw Error("unreachable");
}

GeneratorSpec GeneratorSpec::parse(const std::string& text) {
  Call c = parse_call(text);
  GeneratorSpec g;
  if (c.name == "polygon_exhaustion") {
    g.kind = Kind::PolygonExhaustion;
    // accepts polygon_exhaustion(disk(r)) or polygon_exhaustion(r)
    if (!c.args.empty() && c.args[0].rfind("disk", 0) == 0) {
      g.params = {DomainSpec::parse(c.args[0]).radius};
    } else if (!c.args.empty()) {
      g.params = {arg_number(c, 0)};
    } else {
      g.params = {0.38};
    }
  } else if (c.name == "shrinking_crack") {
    g.kind = Kind::ShrinkingCrack;
    g.params = {c.args.empty() ? 1.0 : arg_number(c, 0)};
  } else if (c.name == "perforated") {
    g.kind = Kind::Perforated;
  } else if (c.name == "translated_hole") {
    g.kind = Kind::TranslatedHole;
    g.params = {c.args.empty() ? 0.15 : arg_number(c, 0),
                c.args.size() < 2 ? 0.2 : arg_number(c, 1)};
  } else if (c.name == "appendage") {
    g.kind = Kind::Appendage;
    g.params = {c.args.empty() ? 0.3 : arg_number(c, 0)};
  } else if (c.name == "nested_squares") {
    g.kind = Kind::NestedSquares;
    g.params = {c.args.empty() ? 0.5 : arg_number(c, 0),
                c.args.size() < 2 ? 0.8 : arg_number(c, 1)};
  } else if (c.name == "constant") {
    g.kind = Kind::Constant;
    g.base = c.args.empty() ? DomainSpec{} : DomainSpec::parse(c.args[0]);
  } else {
    throw UnknownGenerator("unknown generator '" + text + "'");
  }
  return g;
}

std::string GeneratorSpec::str() const {
  char buf[96];
  switch (kind) {
    case Kind::PolygonExhaustion:
      std::snprintf(buf, sizeof buf, "polygon_exhaustion(%g)", params[0]);
      return buf;
    case Kind::ShrinkingCrack:
      std::snprintf(buf, sizeof buf, "shrinking_crack(%g)", params[0]);
      return buf;
    case Kind::Perforated:
      return "perforated";
    case Kind::TranslatedHole:
      std::snprintf(buf, sizeof buf, "translated_hole(%g,%g)", params[0], params[1]);
      return buf;
    case Kind::Appendage:
      std::snprintf(buf, sizeof buf, "appendage(%g)", params[0]);
      return buf;
    case Kind::NestedSquares:
      std::snprintf(buf, sizeof buf, "nested_squares(%g,%g)", params[0], params[1]);
      return buf;
    case Kind::Constant:
      return "constant(" + base.str() + ")";
  }
  return "constant(full)";
}

namespace {

std::vector<Vec2> regular_polygon(Vec2 center, double radius, int sides) {
  std::vector<Vec2> v(sides);
  constexpr double pi = std::numbers::pi;
  for (int k = 0; k < sides; ++k) {
    double t = pi / 2 + 2.0 * pi * k / sides;
    v[k] = {center.x + radius * std::cos(t), center.y + radius * std::sin(t)};
  }
  return v;
}

}  // namespace

RasterDomain domain_sequence(const GeneratorSpec& spec, int n, int resolution) {
  Box box = unit_box();
  switch (spec.kind) {
    case GeneratorSpec::Kind::PolygonExhaustion: {
      if (n < 3) throw PreconditionViolated("polygon exhaustion needs n >= 3");
      return rasterize_convex_polygon(
          box, resolution, regular_polygon(box.center(), spec.params[0], n));
    }
    case GeneratorSpec::Kind::ShrinkingCrack: {
      if (n < 1) throw PreconditionViolated("crack index must be positive");
      RasterDomain d = RasterDomain::full(box, resolution);
      double len = std::min(spec.params[0] / n, 0.45);
      Vec2 c = box.center();
      subtract_segment(d, c, {c.x + len, c.y});
      return d;
    }
    case GeneratorSpec::Kind::Perforated:
      return cioranescu_murat_domain(n, resolution);
    case GeneratorSpec::Kind::TranslatedHole: {
      if (n < 1) throw PreconditionViolated("hole index must be positive");
      RasterDomain d = RasterDomain::full(box, resolution);
      Vec2 c = box.center();
      subtract_disk(d, {c.x + spec.params[1] / n, c.y}, spec.params[0]);
      return d;
    }
    case GeneratorSpec::Kind::Appendage: {
      if (n < 1) throw PreconditionViolated("appendage index must be positive");
      Vec2 c = box.center();
      RasterDomain base = rasterize_rect(box, resolution,
                                         {c.x - 0.25, c.y - 0.25, c.x + 0.25, c.y + 0.25});
      double s = spec.params[0] / n;
      double overlap = 3.0 / resolution;
      RasterDomain app = rasterize_rect(
          box, resolution,
          {c.x - 0.25 - s + overlap, c.y - s / 2, c.x - 0.25 + overlap, c.y + s / 2});
      return domain_union(base, app);
    }
    case GeneratorSpec::Kind::NestedSquares: {
      if (n < 1) throw PreconditionViolated("square index must be positive");
      double side = spec.params[0] + (spec.params[1] - spec.params[0]) / n;
      Vec2 c = box.center();
      double a = side / 2;
      return rasterize_rect(box, resolution, {c.x - a, c.y - a, c.x + a, c.y + a});
    }
    case GeneratorSpec::Kind::Constant:
      return make_domain(spec.base, box, resolution);
  }
  throw UnknownGenerator("unhandled generator kind");
}

RasterDomain limit_domain(const GeneratorSpec& spec, int resolution) {
  Box box = unit_box();
  switch (spec.kind) {
    case GeneratorSpec::Kind::PolygonExhaustion:
      return rasterize_disk(box, resolution, box.center(), spec.params[0]);
    case GeneratorSpec::Kind::ShrinkingCrack:
      return RasterDomain::full(box, resolution);
    case GeneratorSpec::Kind::Perforated:
      return RasterDomain::empty(box, resolution);
    case GeneratorSpec::Kind::TranslatedHole: {
      RasterDomain d = RasterDomain::full(box, resolution);
      subtract_disk(d, box.center(), spec.params[0]);
      return d;
    }
    case GeneratorSpec::Kind::Appendage: {
      Vec2 c = box.center();
      return rasterize_rect(box, resolution,
                            {c.x - 0.25, c.y - 0.25, c.x + 0.25, c.y + 0.25});
    }
    case GeneratorSpec::Kind::NestedSquares: {
      Vec2 c = box.center();
      double a = spec.params[0] / 2;
      return rasterize_rect(box, resolution, {c.x - a, c.y - a, c.x + a, c.y + a});
    }
    case GeneratorSpec::Kind::Constant:
      return make_domain(spec.base, box, resolution);
  }
  throw UnknownGenerator("unhandled generator kind");
}

// ---- serialization -------------------------------------------------------------

void write_pgm(const RasterDomain& o, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  char header[160];
  int len = std::snprintf(header, sizeof header,
                          "P5\n# box %.17g %.17g %.17g %.17g res %d\n%d %d\n1\n",
                          o.box().x0, o.box().y0, o.box().x1, o.box().y1,
                          o.resolution(), o.nx(), o.ny());
  out.write(header, len);
  // PGM rows run top to bottom; our iy runs bottom to top
  std::vector<char> row(o.nx());
  for (int iy = o.ny() - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < o.nx(); ++ix) row[ix] = o.inside(ix, iy) ? 1 : 0;
    out.write(row.data(), row.size());
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

RasterDomain read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string magic;
  in >> magic;
  if (magic != "P5" && magic != "P2") throw IoError("not a PGM file: " + path);
  Box box = unit_box();
  int res = 0;
  auto skip_ws_and_comments = [&]() {
    while (true) {
      int ch = in.peek();
      if (ch == '#') {
        std::string line;
        std::getline(in, line);
        double x0, y0, x1, y1;
        int r;
        if (std::sscanf(line.c_str(), "# box %lg %lg %lg %lg res %d", &x0, &y0,
                        &x1, &y1, &r) == 5) {
          box = {x0, y0, x1, y1};
          res = r;
        }
      } else if (std::isspace(ch)) {
        in.get();
      } else {
        break;
      }
    }
  };
  skip_ws_and_comments();
  int nx, ny, maxval;
  in >> nx;
  skip_ws_and_comments();
  in >> ny;
  skip_ws_and_comments();
  in >> maxval;
  in.get();  // single whitespace after maxval
  if (nx <= 0 || ny <= 0 || maxval <= 0) throw IoError("bad PGM header");
  if (res == 0) {
    res = nx;
    box = {0.0, 0.0, 1.0, static_cast<double>(ny) / nx};
  }
  RasterDomain d(box, res);
  if (d.nx() != nx || d.ny() != ny)
    throw IoError("PGM dimensions disagree with its box metadata");
  if (magic == "P5") {
    std::vector<char> row(nx);
    for (int iy = ny - 1; iy >= 0; --iy) {
      in.read(row.data(), row.size());
      if (!in) throw IoError("truncated PGM data");
      for (int ix = 0; ix < nx; ++ix) d.set(ix, iy, row[ix] != 0);
    }
  } else {
    for (int iy = ny - 1; iy >= 0; --iy)
      for (int ix = 0; ix < nx; ++ix) {
        int v;
        in >> v;
        d.set(ix, iy, v != 0);
      }
  }
  return d;
}

std::string to_rle_json(const RasterDomain& o) {
  nlohmann::json j;
  j["box"] = {o.box().x0, o.box().y0, o.box().x1, o.box().y1};
  j["resolution"] = o.resolution();
  j["width"] = o.nx();
  j["height"] = o.ny();
  std::vector<long long> runs;
  std::uint8_t cur = 0;
  long long len = 0;
  for (std::uint8_t v : o.mask()) {
    if (v == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = v;
      len = 1;
    }
  }
  runs.push_back(len);
  j["runs"] = runs;
  return j.dump();
}

RasterDomain from_rle_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  auto b = j.at("box");
  Box box{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
          b.at(3).get<double>()};
  RasterDomain d(box, j.at("resolution").get<int>());
  if (d.nx() != j.at("width").get<int>() || d.ny() != j.at("height").get<int>())
    throw IoError("RLE JSON dimensions disagree with box metadata");
  std::size_t k = 0;
  std::uint8_t cur = 0;
  for (auto& run : j.at("runs")) {
    long long len = run.get<long long>();
    for (long long i = 0; i < len; ++i) {
      if (k >= d.mask().size()) throw IoError("RLE runs overflow the mask");
      d.mask()[k++] = cur;
    }
    cur = 1 - cur;
  }
  if (k != d.mask().size()) throw IoError("RLE runs do not fill the mask");
  return d;
}

}  // namespace vexlap
