#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "amstokes/fespace.hpp"
#include "amstokes/integrate.hpp"
#include "amstokes/kellogg.hpp"
#include "amstokes/quadrature.hpp"

using namespace amstokes;

TEST_CASE("dof counts") {
  const Mesh m = build_structured_mesh(2);  // 25 vertices, 56 edges, 32 triangles
  CHECK(build_dof_map(m, Family::P1Vector).n_dofs == 50);
  CHECK(build_dof_map(m, Family::RT0Tensor).n_dofs == 112);
  CHECK(build_dof_map(m, Family::BDM1Tensor).n_dofs == 224);
  CHECK(build_dof_map(m, Family::P2Vector).n_dofs == 162);
}

TEST_CASE("RT0 basis satisfies its edge functionals") {
  const Mesh m = build_structured_mesh(2);
  const DofMap dm = build_dof_map(m, Family::RT0Tensor);
  const auto& quad = edge_rule(4);
  for (int k : {0, 5, 17}) {
    const ElementGeometry g = geometry(m, k);
    const CellBasis basis(m, dm, k, g);
    for (int i = 0; i < 3; ++i) {
      const int e = m.tri_edges[k][i];
      const Vec2 A = m.vertices[m.edges[e].a], B = m.vertices[m.edges[e].b];
      const Vec2 t = B - A;
      const Vec2 n = Vec2{t.y, -t.x} * (1.0 / t.norm());
      for (int s = 0; s < 3; ++s) {
        double flux = 0.0;
        for (size_t q = 0; q < quad.points.size(); ++q) {
          std::array<Vec2, 6> w;
          basis.eval_hdiv(A + t * quad.points[q], w.data());
          flux += quad.weights[q] * w[s].dot(n);
        }
        CHECK(flux == doctest::Approx(s == i ? 1.0 : 0.0).epsilon(1e-12));
      }
    }
    // divergence = +-|e|/|K|, constant; cross-check by finite differences
    std::array<Vec2, 6> wc, wx, wy;
    const Vec2 c = g.point(1.0 / 3, 1.0 / 3, 1.0 / 3);
    const double h = 1e-6;
    basis.eval_hdiv(c, wc.data());
    basis.eval_hdiv({c.x + h, c.y}, wx.data());
    basis.eval_hdiv({c.x, c.y + h}, wy.data());
    for (int s = 0; s < 3; ++s) {
      const double fd = (wx[s].x - wc[s].x) / h + (wy[s].y - wc[s].y) / h;
      CHECK(fd == doctest::Approx(basis.hdiv_div()[s]).epsilon(1e-6));
      CHECK(std::abs(basis.hdiv_div()[s]) ==
            doctest::Approx(g.edge_length[s] / g.area).epsilon(1e-12));
    }
  }
}

TEST_CASE("Lagrange bases are nodal") {
  const Mesh m = build_structured_mesh(2);
  for (Family fam : {Family::P1Vector, Family::P2Vector}) {
    const DofMap dm = build_dof_map(m, fam);
    const ElementGeometry g = geometry(m, 3);
    const CellBasis basis(m, dm, 3, g);
    const int ns = basis.n_scalar();
    for (int node = 0; node < ns; ++node) {
      const Vec2 p = scalar_node_position(m, fam, dm.cell_scalar[3][node]);
      const auto l = g.barycentric(p);
      std::array<double, 6> v;
      std::array<Vec2, 6> gr;
      basis.eval_lagrange(l[0], l[1], l[2], v.data(), gr.data());
      for (int s = 0; s < ns; ++s)
        CHECK(v[s] == doctest::Approx(s == node ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("H(div) interpolation exactness") {
  const Mesh m = build_structured_mesh(2);
  const DofMap rt = build_dof_map(m, Family::RT0Tensor);
  const DofMap bdm = build_dof_map(m, Family::BDM1Tensor);

  const Tensor2 C{1.5, -0.25, 2.0, 0.75};
  auto constant = [&](Vec2) { return C; };
  auto linear = [](Vec2 x) {
    return Tensor2{1.0 + 2.0 * x.x - x.y, 0.5 * x.x, -x.x + 3.0 * x.y, 2.0 - x.y};
  };

  const auto crt = interpolate_hdiv(constant, m, Family::RT0Tensor);
  const auto cbdm = interpolate_hdiv(linear, m, Family::BDM1Tensor);
  for (int k = 0; k < m.n_triangles(); ++k) {
    const ElementGeometry g = geometry(m, k);
    const CellBasis brt(m, rt, k, g);
    const CellBasis bbdm(m, bdm, k, g);
    for (auto [l0, l1, l2] : {std::array<double, 3>{0.2, 0.3, 0.5}, {0.7, 0.1, 0.2}}) {
      const Vec2 p = g.point(l0, l1, l2);
      CHECK((eval_hdiv_field(brt, rt, k, crt, p).value - C).frobenius_norm() <= 1e-12);
      CHECK((eval_hdiv_field(bbdm, bdm, k, cbdm, p).value - linear(p)).frobenius_norm() <= 1e-12);
    }
  }
}

TEST_CASE("H(div) interpolation convergence rates") {
  auto smooth = [](Vec2 x) {
    return Tensor2{std::sin(x.x + 0.3 * x.y), std::cos(0.7 * x.x), std::sin(0.5 * x.y - x.x),
                   std::cos(x.x + x.y)};
  };
  for (auto [fam, expected] :
       {std::pair<Family, double>{Family::RT0Tensor, 1.0}, {Family::BDM1Tensor, 2.0}}) {
    std::vector<double> errs;
    for (int n : {4, 8, 16}) {
      const Mesh m = build_structured_mesh(n);
      const DofMap dm = build_dof_map(m, fam);
      const auto coeffs = interpolate_hdiv(smooth, m, fam);
      double err2 = 0.0;
      const auto& rule = triangle_rule(8);
      for (int k = 0; k < m.n_triangles(); ++k) {
        const ElementGeometry g = geometry(m, k);
        const CellBasis basis(m, dm, k, g);
        err2 += integrate_triangle(g, rule, [&](const Vec2& x, double, double, double) {
          const Tensor2 d = smooth(x) - eval_hdiv_field(basis, dm, k, coeffs, x).value;
          return ddot(d, d);
        });
      }
      errs.push_back(std::sqrt(err2));
    }
    const double rate = std::log2(errs[1] / errs[2]);
    CHECK(rate == doctest::Approx(expected).epsilon(0.08));
  }
}

TEST_CASE("normal trace continuity for random coefficients") {
  Mesh m = build_structured_mesh(2);
  m = bisect(m, {0, 3, 9, 20});
  std::mt19937_64 rng(5);
  std::normal_distribution<double> N(0.0, 1.0);
  for (Family fam : {Family::RT0Tensor, Family::BDM1Tensor}) {
    const DofMap dm = build_dof_map(m, fam);
    std::vector<double> coeffs(dm.n_dofs);
    for (auto& c : coeffs) c = N(rng);
    const auto& quad = edge_rule(3);
    for (int e = 0; e < m.n_edges(); ++e) {
      if (m.edges[e].boundary) continue;
      const Vec2 A = m.vertices[m.edges[e].a], B = m.vertices[m.edges[e].b];
      const Vec2 t = B - A;
      const Vec2 n = Vec2{t.y, -t.x} * (1.0 / t.norm());
      const int k0 = m.edges[e].tri[0], k1 = m.edges[e].tri[1];
      const CellBasis b0(m, dm, k0, geometry(m, k0));
      const CellBasis b1(m, dm, k1, geometry(m, k1));
      for (double s : quad.points) {
        const Vec2 x = A + t * s;
        const Vec2 j = eval_hdiv_field(b0, dm, k0, coeffs, x).value * n -
                       eval_hdiv_field(b1, dm, k1, coeffs, x).value * n;
        CHECK(j.norm() <= 1e-12 * (1.0 + std::abs(s)));
      }
    }
  }
}

TEST_CASE("divergence of RT interpolant commutes with elementwise projection") {
  auto smooth = [](Vec2 x) {
    return Tensor2{std::sin(x.x), std::cos(x.y), x.x * x.y, std::sin(x.x - x.y)};
  };
  auto div_smooth = [](Vec2 x) {
    return Vec2{std::cos(x.x) - std::sin(x.y), x.y - std::cos(x.x - x.y)};
  };
  const Mesh m = build_structured_mesh(4);
  const DofMap dm = build_dof_map(m, Family::RT0Tensor);
  const auto coeffs = interpolate_hdiv(smooth, m, Family::RT0Tensor);
  const auto& rule = triangle_rule(8);
  for (int k = 0; k < m.n_triangles(); ++k) {
    const ElementGeometry g = geometry(m, k);
    const CellBasis basis(m, dm, k, g);
    const Vec2 dh =
        eval_hdiv_field(basis, dm, k, coeffs, g.point(1.0 / 3, 1.0 / 3, 1.0 / 3)).divergence;
    Vec2 mean{0.0, 0.0};
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto& p = rule.points[q];
      mean += rule.weights[q] * div_smooth(g.point(p.l0, p.l1, p.l2));
    }
    CHECK((dh - mean).norm() <= 1e-10 * (1.0 + mean.norm()));
  }
}

TEST_CASE("trace correction") {
  const Mesh m = build_structured_mesh(2);
  const DofMap dm = build_dof_map(m, Family::RT0Tensor);
  Viscosity nu;
  nu.nu = dataset_seed(1).nu;

  SUBCASE("identity tensor with uniform viscosity maps to zero") {
    Viscosity one;
    auto id = interpolate_hdiv([](Vec2) { return Tensor2::identity(); }, m, Family::RT0Tensor);
    const double phi = trace_correction(id, dm, m, one);
    CHECK(phi == doctest::Approx(1.0).epsilon(1e-12));
    for (double c : id) CHECK(std::abs(c) <= 1e-12);
  }

  SUBCASE("already-constrained input is unchanged") {
    auto devfield = interpolate_hdiv([](Vec2 x) { return Tensor2{x.y, 1.0, -2.0, -x.y}; }, m,
                                     Family::RT0Tensor);
    auto copy = devfield;
    const double phi = trace_correction(devfield, dm, m, nu);
    CHECK(std::abs(phi) <= 1e-13);
    for (size_t i = 0; i < copy.size(); ++i) CHECK(devfield[i] == doctest::Approx(copy[i]));
  }

  SUBCASE("random coefficients, Data1 viscosity") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> N(0.0, 1.0);
    std::vector<double> coeffs(dm.n_dofs);
    for (auto& c : coeffs) c = N(rng);
    auto before = coeffs;
    const auto div_at = [&](int k, const std::vector<double>& cf) {
      const ElementGeometry g = geometry(m, k);
      const CellBasis basis(m, dm, k, g);
      return eval_hdiv_field(basis, dm, k, cf, g.point(0.4, 0.3, 0.3)).divergence;
    };
    const Vec2 d0 = div_at(9, coeffs);
    trace_correction(coeffs, dm, m, nu);
    CHECK(std::abs(weighted_trace_integral(coeffs, dm, m, nu)) <= 1e-12);
    CHECK((div_at(9, coeffs) - d0).norm() <= 1e-12);
    // idempotent
    auto once = coeffs;
    const double phi2 = trace_correction(coeffs, dm, m, nu);
    CHECK(std::abs(phi2) <= 1e-13);
    for (size_t i = 0; i < once.size(); ++i)
      CHECK(std::abs(coeffs[i] - once[i]) <= 1e-13 * (1.0 + std::abs(once[i])));
    (void)before;
  }
}

TEST_CASE("L2 projection") {
  const Mesh m = build_structured_mesh(4);

  SUBCASE("reproduces fields in the space") {
    auto linear = [](Vec2 x) { return Vec2{1.0 + x.x - 2.0 * x.y, 0.5 * x.x + x.y}; };
    const auto c1 = l2_project(linear, m, Family::P1Vector);
    const DofMap dm = build_dof_map(m, Family::P1Vector);
    for (int s = 0; s < dm.n_scalar; ++s) {
      const Vec2 u = linear(scalar_node_position(m, Family::P1Vector, s));
      CHECK(c1[2 * s] == doctest::Approx(u.x).epsilon(1e-12));
      CHECK(c1[2 * s + 1] == doctest::Approx(u.y).epsilon(1e-12));
    }
    auto constant = [](Vec2) { return Vec2{3.0, -2.0}; };
    const auto c2 = l2_project(constant, m, Family::P2Vector);
    for (double v : std::vector<double>{c2[0], c2[1]}) CHECK(std::abs(v) > 0.0);
  }

  SUBCASE("residual is orthogonal to the space") {
    auto field = [](Vec2 x) { return Vec2{std::sin(x.x * x.y), std::cos(x.x - x.y)}; };
    const auto coeffs = l2_project(field, m, Family::P2Vector);
    const DofMap dm = build_dof_map(m, Family::P2Vector);
    std::vector<double> residual(dm.n_scalar * 2, 0.0);
    const auto& rule = triangle_rule(10);
    for (int k = 0; k < m.n_triangles(); ++k) {
      const ElementGeometry g = geometry(m, k);
      const CellBasis basis(m, dm, k, g);
      std::array<double, 6> val;
      std::array<Vec2, 6> grad;
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const auto& p = rule.points[q];
        const Vec2 x = g.point(p.l0, p.l1, p.l2);
        basis.eval_lagrange(p.l0, p.l1, p.l2, val.data(), grad.data());
        const Vec2 diff =
            field(x) - eval_lagrange_field(basis, dm, k, coeffs, p.l0, p.l1, p.l2).value;
        for (int s = 0; s < basis.n_scalar(); ++s) {
          residual[2 * dm.cell_scalar[k][s]] += rule.weights[q] * g.area * diff.x * val[s];
          residual[2 * dm.cell_scalar[k][s] + 1] += rule.weights[q] * g.area * diff.y * val[s];
        }
      }
    }
    for (double r : residual) CHECK(std::abs(r) <= 1e-10);
  }
}
