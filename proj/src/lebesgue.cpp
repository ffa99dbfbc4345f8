#include "vexlap/lebesgue.hpp"

#include <algorithm>
#include <cmath>

namespace vexlap {

std::vector<double> exponent_at(const ExponentField& p, const FieldSample& f) {
  const Box& b = p.box();
  double slack = 1e-9 * std::max(b.width(), b.height());
  std::vector<double> out;
  out.reserve(f.points.size());
  for (const Vec2& q : f.points) {
    if (q.x < b.x0 - slack || q.x > b.x1 + slack || q.y < b.y0 - slack ||
        q.y > b.y1 + slack)
      throw IncompatibleSampling("sample point outside the exponent grid");
    out.push_back(p.sample(q));
  }
  return out;
}

double modular(const FieldSample& f, const std::vector<double>& p_at_points) {
  if (p_at_points.size() != f.values.size())
    throw IncompatibleSampling("modular: exponent and field sample sizes differ");
  CompensatedSum sum;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    double v = std::abs(f.values[k]);
    if (v == 0.0) continue;
    sum.add(f.weights[k] * std::pow(v, p_at_points[k]));
  }
  return sum.value();
}

double modular(const FieldSample& f, const ExponentField& p) {
  return modular(f, exponent_at(p, f));
}

namespace {

double modular_scaled(const FieldSample& f, const std::vector<double>& pk,
                      double inv_lambda) {
  CompensatedSum sum;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    double v = std::abs(f.values[k]) * inv_lambda;
    if (v == 0.0) continue;
    sum.add(f.weights[k] * std::pow(v, pk[k]));
  }
  return sum.value();
}

}  // namespace

double luxemburg_norm(const FieldSample& f, const ExponentField& p) {
  auto pk = exponent_at(p, f);
  double rho = modular(f, pk);
  if (rho == 0.0) return 0.0;
  double pm = p.p_minus(), pp = p.p_plus();
  double b1 = std::pow(rho, 1.0 / pm), b2 = std::pow(rho, 1.0 / pp);
  double lo = std::min(b1, b2), hi = std::max(b1, b2);
  // the modular-norm inequalities bracket the norm; pad for roundoff
  lo *= 1.0 - 1e-12;
  hi *= 1.0 + 1e-12;
  while (modular_scaled(f, pk, 1.0 / hi) > 1.0) hi *= 2.0;
  while (lo > 0.0 && modular_scaled(f, pk, 1.0 / lo) < 1.0) lo *= 0.5;
  double mid = hi;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    double m = modular_scaled(f, pk, 1.0 / mid);
    if (std::abs(m - 1.0) <= 1e-13) break;
    if (m > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-13 * hi) {
      mid = 0.5 * (lo + hi);
      break;
    }
  }
  return mid;
}

SandwichReport check_modular_norm_sandwich(const FieldSample& f,
                                           const ExponentField& p) {
  SandwichReport r;
  r.norm = luxemburg_norm(f, p);
  r.mod = modular(f, p);
  double a = std::pow(r.norm, p.p_minus()), b = std::pow(r.norm, p.p_plus());
  r.lower = std::min(a, b);
  r.upper = std::max(a, b);
  r.margin_lower = r.mod - r.lower;
  r.margin_upper = r.upper - r.mod;
  double scale = std::max({1.0, r.mod, r.upper});
  r.pass = r.margin_lower >= -1e-9 * scale && r.margin_upper >= -1e-9 * scale;
  return r;
}

HolderReport check_holder(const FieldSample& u, const FieldSample& v,
                          const ExponentField& p) {
  if (u.size() != v.size())
    throw IncompatibleSampling("Holder check needs one quadrature");
  HolderReport r;
  CompensatedSum sum;
  for (std::size_t k = 0; k < u.size(); ++k)
    sum.add(u.weights[k] * std::abs(u.values[k] * v.values[k]));
  r.lhs = sum.value();
  r.rhs = 2.0 * luxemburg_norm(u, p) * luxemburg_norm(v, conjugate(p));
  r.margin = r.rhs - r.lhs;
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);
  return r;
}

}  // namespace vexlap
