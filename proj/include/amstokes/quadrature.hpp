#pragma once

#include <vector>

#include "amstokes/tensor.hpp"

namespace amstokes {

/// Quadrature rule on the reference triangle, points in barycentric
/// coordinates. Weights are normalised to sum to 1, so a physical integral is
/// |K| * sum_i w_i f(x_i).
struct QuadratureRule {
  struct Point {
    double l0, l1, l2;
  };
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0;
};

/// Rule exact to at least the requested polynomial degree (1..12).
/// Low degrees use the classic symmetric triangle rules; higher degrees fall
/// back to a conical-product construction with positive interior points.
const QuadratureRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [0,1], n points, exact to degree 2n-1.
/// Weights sum to 1.
struct EdgeRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const EdgeRule& edge_rule(int npoints);

}  // namespace amstokes
