#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "amstokes/quadrature.hpp"

using namespace amstokes;

namespace {

// Exact monomial integral over the reference triangle (0,0),(1,0),(0,1):
// int x^i y^j = i! j! / (i+j+2)!
double monomial_integral(int i, int j) {
  double v = 1.0;
  for (int k = 1; k <= i; ++k) v *= k;
  for (int k = 1; k <= j; ++k) v *= k;
  for (int k = 1; k <= i + j + 2; ++k) v /= k;
  return v;
}

double apply(const QuadratureRule& r, int i, int j) {
  double s = 0.0;
  for (size_t q = 0; q < r.points.size(); ++q) {
    const double x = r.points[q].l1;
    const double y = r.points[q].l2;
    s += r.weights[q] * std::pow(x, i) * std::pow(y, j);
  }
  return 0.5 * s;  // reference area
}

}  // namespace

TEST_CASE("triangle rules reproduce monomial integrals up to their degree") {
  for (int degree = 1; degree <= 12; ++degree) {
    const auto& rule = triangle_rule(degree);
    double wsum = 0.0;
    for (double w : rule.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
    for (int i = 0; i + 0 <= degree; ++i)
      for (int j = 0; i + j <= degree; ++j) {
        const double exact = monomial_integral(i, j);
        CHECK(std::abs(apply(rule, i, j) - exact) <= 1e-12 * exact);
      }
  }
}

TEST_CASE("degree 1 is the centroid rule") {
  const auto& r = triangle_rule(1);
  REQUIRE(r.points.size() == 1);
  CHECK(r.weights[0] == doctest::Approx(1.0));
  CHECK(r.points[0].l0 == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("degree 4 is the classic six-point rule") {
  const auto& r = triangle_rule(4);
  REQUIRE(r.points.size() == 6);
  // x^2 y^2 = 2!2!/6! = 1/180
  CHECK(std::abs(apply(r, 2, 2) - 1.0 / 180.0) <= 1e-14);
}

TEST_CASE("degree 10 rule integrates x^5 y^5 to 1e-12") {
  const auto& r = triangle_rule(10);
  const double exact = monomial_integral(5, 5);
  CHECK(std::abs(apply(r, 5, 5) - exact) <= 1e-12 * exact);
}

TEST_CASE("unsupported degrees are rejected") {
  CHECK_THROWS(triangle_rule(0));
  CHECK_THROWS(triangle_rule(13));
}

TEST_CASE("edge rules are Gauss-exact") {
  for (int n = 1; n <= 10; ++n) {
    const auto& r = edge_rule(n);
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (size_t q = 0; q < r.points.size(); ++q) s += r.weights[q] * std::pow(r.points[q], p);
      CHECK(std::abs(s - 1.0 / (p + 1)) <= 1e-13);
    }
  }
}
