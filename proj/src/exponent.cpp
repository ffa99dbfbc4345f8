#include "vexlap/exponent.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace vexlap {

namespace {

int nodes_along(double length, int resolution) {
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

double ExponentDescriptor::eval(Vec2 p, const Box& box) const {
  switch (kind) {
    case Kind::Constant:
      return a;
    case Kind::Affine:
      return a + b * p.x + c * p.y;
    case Kind::Radial: {
      Vec2 d = p - box.center();
      return a + b * d.norm();
    }
  }
  return a;
}

ExponentDescriptor ExponentDescriptor::parse(const std::string& text) {
  auto open = text.find('(');
  auto close = text.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw ConfigError("bad exponent descriptor '" + text + "'");
  std::string name = text.substr(0, open);
  name.erase(std::remove_if(name.begin(), name.end(), ::isspace), name.end());
  std::string inner = text.substr(open + 1, close - open - 1);
  std::vector<double> args;
  std::size_t pos = 0;
  while (pos < inner.size()) {
    auto comma = inner.find(',', pos);
    std::string tok = inner.substr(pos, comma == std::string::npos ? std::string::npos
                                                                   : comma - pos);
    try {
      args.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "' in exponent descriptor");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  ExponentDescriptor d;
  if (name == "constant" && args.size() == 1) {
    d.kind = Kind::Constant;
    d.a = args[0];
  } else if (name == "affine" && args.size() == 3) {
    d.kind = Kind::Affine;
    d.a = args[0];
    d.b = args[1];
    d.c = args[2];
  } else if (name == "radial" && args.size() == 2) {
    d.kind = Kind::Radial;
    d.a = args[0];
    d.b = args[1];
  } else {
    throw ConfigError("unknown exponent descriptor '" + text + "'");
  }
  return d;
}

std::string ExponentDescriptor::str() const {
  char buf[96];
  switch (kind) {
    case Kind::Constant:
      std::snprintf(buf, sizeof buf, "constant(%g)", a);
      break;
    case Kind::Affine:
      std::snprintf(buf, sizeof buf, "affine(%g,%g,%g)", a, b, c);
      break;
    case Kind::Radial:
      std::snprintf(buf, sizeof buf, "radial(%g,%g)", a, b);
      break;
  }
  return buf;
}

ExponentField::ExponentField(Box box, int resolution, std::vector<double> nodal_values)
    : box_(box), res_(resolution) {
  nx_ = nodes_along(box.width(), resolution);
  ny_ = nodes_along(box.height(), resolution);
  if (static_cast<int>(nodal_values.size()) != (nx_ + 1) * (ny_ + 1))
    throw ResolutionMismatch("exponent sample count does not match the grid");
  values_ = std::move(nodal_values);
  p_minus_ = values_[0];
  p_plus_ = values_[0];
  for (double v : values_) {
    if (!std::isfinite(v))
      throw NonAdmissibleExponent("exponent sample is not finite");
    p_minus_ = std::min(p_minus_, v);
    p_plus_ = std::max(p_plus_, v);
  }
  if (p_minus_ < min_admissible())
    throw NonAdmissibleExponent("exponent minimum " + std::to_string(p_minus_) +
                                " is not above 1");
}

Vec2 ExponentField::node_xy(int node) const {
  int ix = node % (nx_ + 1), iy = node / (nx_ + 1);
  return {box_.x0 + ix * h(), box_.y0 + iy * h()};
}

double ExponentField::sample(Vec2 p) const {
  double hx = h();
  double x = std::clamp((p.x - box_.x0) / hx, 0.0, static_cast<double>(nx_));
  double y = std::clamp((p.y - box_.y0) / hx, 0.0, static_cast<double>(ny_));
  int ix = std::min(static_cast<int>(x), nx_ - 1);
  int iy = std::min(static_cast<int>(y), ny_ - 1);
  double fx = x - ix, fy = y - iy;
  double v00 = at(ix, iy), v10 = at(ix + 1, iy), v11 = at(ix + 1, iy + 1),
         v01 = at(ix, iy + 1);
  // P1 interpolation on the two triangles of the cell (diagonal 00 -> 11)
  if (fx >= fy) {
    return v00 + fx * (v10 - v00) + fy * (v11 - v10);
  }
  return v00 + fy * (v01 - v00) + fx * (v11 - v01);
}

ExponentField make_exponent(const ExponentDescriptor& desc, Box box, int resolution) {
  int nx = nodes_along(box.width(), resolution);
  int ny = nodes_along(box.height(), resolution);
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  double h = 1.0 / resolution;
  for (int iy = 0; iy <= ny; ++iy)
    for (int ix = 0; ix <= nx; ++ix)
      v.push_back(desc.eval({box.x0 + ix * h, box.y0 + iy * h}, box));
  return {box, resolution, std::move(v)};
}

double log_holder_modulus(const ExponentField& p) {
  int n = p.node_count();
  if (n < 2) throw PreconditionViolated("log-Holder modulus needs >= 2 nodes");
  int stride = p.nx() + 1;
  double h = p.h();
  double best = 0.0;
  for (int a = 0; a < n; ++a) {
    int ax = a % stride, ay = a / stride;
    double pa = p.at(a);
    for (int b = a + 1; b < n; ++b) {
      int bx = b % stride, by = b / stride;
      double dx = (bx - ax) * h, dy = (by - ay) * h;
      double r2 = dx * dx + dy * dy;
      if (r2 >= 1.0) continue;  // log would change sign
      double dp = std::abs(p.at(b) - pa);
      if (dp == 0.0) continue;
      double v = -0.5 * std::log(r2) * dp;
      if (v > best) best = v;
    }
  }
  return best;
}

ExponentField conjugate(const ExponentField& p) {
  std::vector<double> v(p.values());
  for (double& x : v) x = x / (x - 1.0);
  return {p.box(), p.resolution(), std::move(v)};
}

}  // namespace vexlap
