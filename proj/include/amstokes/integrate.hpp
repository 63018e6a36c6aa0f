#pragma once

#include <array>
#include <cmath>

#include "amstokes/mesh.hpp"
#include "amstokes/quadrature.hpp"

namespace amstokes {

/// Integral over one triangle; f receives the physical point and its
/// barycentric coordinates with respect to the element.
template <class F>
double integrate_triangle(const ElementGeometry& g, const QuadratureRule& rule, F&& f) {
  double s = 0.0;
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const auto& p = rule.points[q];
    s += rule.weights[q] * f(g.point(p.l0, p.l1, p.l2), p.l0, p.l1, p.l2);
  }
  return g.area * s;
}

namespace detail {
inline double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}
}  // namespace detail

namespace detail {

/// tanh-sinh nodes/weights on (0,1); integrates endpoint algebraic
/// singularities of any integrable power to near machine precision.
struct TanhSinhRule {
  std::vector<double> points;
  std::vector<double> weights;
  TanhSinhRule() {
    const double step = 0.08;
    const double pi_half = 1.5707963267948966;
    for (int k = -55; k <= 55; ++k) {
      const double u = k * step;
      const double s = pi_half * std::sinh(u);
      // x = (1 + tanh(s))/2 written with exp so the left tail stays
      // representable down to ~1e-56 instead of underflowing at ~1e-16.
      const double x = 1.0 / (1.0 + std::exp(-2.0 * s));
      const double c = std::cosh(s);
      const double w = step * pi_half * std::cosh(u) / (2.0 * c * c);
      if (x <= 0.0 || x >= 1.0 || w < 1e-300) continue;
      points.push_back(x);
      weights.push_back(w);
    }
  }
};

inline const TanhSinhRule& tanh_sinh_rule() {
  static const TanhSinhRule rule;
  return rule;
}

}  // namespace detail

/// Integral over the triangle (v0,v1,v2) of an integrand with an integrable
/// power singularity at v0: double-exponential rule in the radial direction,
/// Gauss in the chord direction. f receives the physical point only.
template <class F>
double integrate_corner_singular(const std::array<Vec2, 3>& v, F&& f) {
  const auto& radial = detail::tanh_sinh_rule();
  const auto& chord = edge_rule(16);
  const double two_area =
      std::abs((v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y));
  double total = 0.0;
  for (size_t i = 0; i < chord.points.size(); ++i) {
    const Vec2 c = v[1] * (1.0 - chord.points[i]) + v[2] * chord.points[i] - v[0];
    double line = 0.0;
    for (size_t j = 0; j < radial.points.size(); ++j) {
      const double rho = radial.points[j];
      line += radial.weights[j] * rho * f(v[0] + c * rho);
    }
    total += chord.weights[i] * line;
  }
  return two_area * total;
}

/// Integral over the triangle (v0,v1,v2) with geometric grading (ratio 1/2,
/// `levels` levels) toward v0, for integrands with an integrable singularity
/// at v0. f receives the physical point only.
template <class F>
double integrate_graded(const std::array<Vec2, 3>& v, const QuadratureRule& rule, int levels,
                        F&& f) {
  auto plain = [&](const Vec2& a, const Vec2& b, const Vec2& c) {
    double s = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto& p = rule.points[q];
      s += rule.weights[q] * f(a * p.l0 + b * p.l1 + c * p.l2);
    }
    return detail::tri_area(a, b, c) * s;
  };
  double total = 0.0;
  double outer = 1.0;
  for (int l = 0; l < levels; ++l) {
    const double inner = 0.5 * outer;
    const Vec2 p1o = v[0] + (v[1] - v[0]) * outer, p2o = v[0] + (v[2] - v[0]) * outer;
    const Vec2 p1i = v[0] + (v[1] - v[0]) * inner, p2i = v[0] + (v[2] - v[0]) * inner;
    total += plain(p1i, p1o, p2o);
    total += plain(p1i, p2o, p2i);
    outer = inner;
  }
  total += plain(v[0], v[0] + (v[1] - v[0]) * outer, v[0] + (v[2] - v[0]) * outer);
  return total;
}

}  // namespace amstokes
