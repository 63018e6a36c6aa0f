#include "amstokes/fespace.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>

#include "amstokes/integrate.hpp"
#include "amstokes/quadrature.hpp"

namespace amstokes {

namespace {

Vec2 edge_normal(const Mesh& mesh, int e) {
  const Vec2 t = mesh.vertices[mesh.edges[e].b] - mesh.vertices[mesh.edges[e].a];
  const double len = t.norm();
  return {t.y / len, -t.x / len};
}

int origin_local_vertex(const ElementGeometry& g) {
  for (int i = 0; i < 3; ++i)
    if (std::abs(g.vertex[i].x) < 1e-14 && std::abs(g.vertex[i].y) < 1e-14) return i;
  return -1;
}

}  // namespace

DofMap build_dof_map(const Mesh& mesh, Family family) {
  DofMap dm;
  dm.family = family;
  const int nv = mesh.n_vertices();
  const int ne = mesh.n_edges();
  const int nt = mesh.n_triangles();
  dm.cell_scalar.assign(nt, {});
  switch (family) {
    case Family::RT0Tensor:
      dm.n_scalar = ne;
      dm.scalars_per_cell = 3;
      for (int k = 0; k < nt; ++k)
        for (int i = 0; i < 3; ++i) dm.cell_scalar[k][i] = mesh.tri_edges[k][i];
      break;
    case Family::BDM1Tensor:
      dm.n_scalar = 2 * ne;
      dm.scalars_per_cell = 6;
      for (int k = 0; k < nt; ++k)
        for (int i = 0; i < 3; ++i)
          for (int mom = 0; mom < 2; ++mom)
            dm.cell_scalar[k][2 * i + mom] = 2 * mesh.tri_edges[k][i] + mom;
      break;
    case Family::P1Vector:
      dm.n_scalar = nv;
      dm.scalars_per_cell = 3;
      for (int k = 0; k < nt; ++k)
        for (int i = 0; i < 3; ++i) dm.cell_scalar[k][i] = mesh.triangles[k].v[i];
      break;
    case Family::P2Vector:
      dm.n_scalar = nv + ne;
      dm.scalars_per_cell = 6;
      for (int k = 0; k < nt; ++k) {
        for (int i = 0; i < 3; ++i) dm.cell_scalar[k][i] = mesh.triangles[k].v[i];
        for (int i = 0; i < 3; ++i) dm.cell_scalar[k][3 + i] = nv + mesh.tri_edges[k][i];
      }
      break;
  }
  dm.n_dofs = 2 * dm.n_scalar;
  dm.dofs_per_cell = 2 * dm.scalars_per_cell;
  if (!is_tensor_family(family)) {
    dm.scalar_on_boundary.assign(dm.n_scalar, 0);
    for (int e = 0; e < ne; ++e) {
      if (!mesh.edges[e].boundary) continue;
      dm.scalar_on_boundary[mesh.edges[e].a] = 1;
      dm.scalar_on_boundary[mesh.edges[e].b] = 1;
      if (family == Family::P2Vector) dm.scalar_on_boundary[nv + e] = 1;
    }
  }
  return dm;
}

Vec2 scalar_node_position(const Mesh& mesh, Family family, int slot) {
  const int nv = mesh.n_vertices();
  if (family == Family::P1Vector || slot < nv) return mesh.vertices[slot];
  const Edge& e = mesh.edges[slot - nv];
  return (mesh.vertices[e.a] + mesh.vertices[e.b]) * 0.5;
}

CellBasis::CellBasis(const Mesh& mesh, const DofMap& dm, int cell, const ElementGeometry& geom)
    : family_(dm.family), geom_(geom) {
  const auto& tri = mesh.triangles[cell];
  switch (family_) {
    case Family::RT0Tensor: {
      n_scalar_ = 3;
      for (int i = 0; i < 3; ++i) {
        const int e = mesh.tri_edges[cell][i];
        const double sign = geom.normal[i].dot(edge_normal(mesh, e)) > 0 ? 1.0 : -1.0;
        rt_opp_[i] = geom.vertex[i];
        rt_scale_[i] = sign * geom.edge_length[i] / (2.0 * geom.area);
        div_[i] = 2.0 * rt_scale_[i];
      }
      break;
    }
    case Family::BDM1Tensor: {
      n_scalar_ = 6;
      const auto& quad = edge_rule(3);
      Eigen::Matrix<double, 6, 6> M;
      for (int i = 0; i < 3; ++i) {
        const int e = mesh.tri_edges[cell][i];
        const Vec2 A = mesh.vertices[mesh.edges[e].a];
        const Vec2 B = mesh.vertices[mesh.edges[e].b];
        const Vec2 n = edge_normal(mesh, e);
        for (int mom = 0; mom < 2; ++mom) {
          Eigen::Matrix<double, 1, 6> row = Eigen::Matrix<double, 1, 6>::Zero();
          for (size_t q = 0; q < quad.points.size(); ++q) {
            const double s = quad.points[q];
            const Vec2 x = A + (B - A) * s;
            const double w = quad.weights[q] * (mom == 0 ? 1.0 : 2.0 * s - 1.0);
            // monomials (1,0),(x,0),(y,0),(0,1),(0,x),(0,y) dotted with n
            row(0) += w * n.x;
            row(1) += w * n.x * x.x;
            row(2) += w * n.x * x.y;
            row(3) += w * n.y;
            row(4) += w * n.y * x.x;
            row(5) += w * n.y * x.y;
          }
          M.row(2 * i + mom) = row;
        }
      }
      const Eigen::Matrix<double, 6, 6> C = M.inverse();
      for (int c = 0; c < 6; ++c) {
        for (int j = 0; j < 6; ++j) bdm_coef_[c][j] = C(j, c);
        div_[c] = C(1, c) + C(5, c);
      }
      break;
    }
    case Family::P1Vector:
      n_scalar_ = 3;
      break;
    case Family::P2Vector:
      n_scalar_ = 6;
      break;
  }
  (void)tri;
}

void CellBasis::eval_hdiv(const Vec2& p, Vec2* value) const {
  if (family_ == Family::RT0Tensor) {
    for (int i = 0; i < 3; ++i) value[i] = (p - rt_opp_[i]) * rt_scale_[i];
  } else {
    for (int c = 0; c < 6; ++c) {
      const auto& a = bdm_coef_[c];
      value[c] = {a[0] + a[1] * p.x + a[2] * p.y, a[3] + a[4] * p.x + a[5] * p.y};
    }
  }
}

void CellBasis::eval_lagrange(double l0, double l1, double l2, double* value, Vec2* grad) const {
  const double l[3] = {l0, l1, l2};
  if (family_ == Family::P1Vector) {
    for (int i = 0; i < 3; ++i) {
      value[i] = l[i];
      grad[i] = geom_.grad_lambda[i];
    }
    return;
  }
  for (int i = 0; i < 3; ++i) {
    value[i] = l[i] * (2.0 * l[i] - 1.0);
    grad[i] = geom_.grad_lambda[i] * (4.0 * l[i] - 1.0);
  }
  for (int i = 0; i < 3; ++i) {
    const int p = (i + 1) % 3, q = (i + 2) % 3;
    value[3 + i] = 4.0 * l[p] * l[q];
    grad[3 + i] = geom_.grad_lambda[p] * (4.0 * l[q]) + geom_.grad_lambda[q] * (4.0 * l[p]);
  }
}

HdivFieldValue eval_hdiv_field(const CellBasis& basis, const DofMap& dm, int cell,
                               const std::vector<double>& coeffs, const Vec2& p) {
  std::array<Vec2, 6> w;
  basis.eval_hdiv(p, w.data());
  HdivFieldValue out;
  out.value = Tensor2{};
  out.divergence = Vec2{};
  for (int s = 0; s < basis.n_scalar(); ++s) {
    const int slot = dm.cell_scalar[cell][s];
    const double c0 = coeffs[2 * slot], c1 = coeffs[2 * slot + 1];
    out.value.t11 += c0 * w[s].x;
    out.value.t12 += c0 * w[s].y;
    out.value.t21 += c1 * w[s].x;
    out.value.t22 += c1 * w[s].y;
    out.divergence.x += c0 * basis.hdiv_div()[s];
    out.divergence.y += c1 * basis.hdiv_div()[s];
  }
  return out;
}

VelocityFieldValue eval_lagrange_field(const CellBasis& basis, const DofMap& dm, int cell,
                                       const std::vector<double>& coeffs, double l0, double l1,
                                       double l2) {
  std::array<double, 6> val;
  std::array<Vec2, 6> grad;
  basis.eval_lagrange(l0, l1, l2, val.data(), grad.data());
  VelocityFieldValue out;
  for (int s = 0; s < basis.n_scalar(); ++s) {
    const int slot = dm.cell_scalar[cell][s];
    const double c0 = coeffs[2 * slot], c1 = coeffs[2 * slot + 1];
    out.value.x += c0 * val[s];
    out.value.y += c1 * val[s];
    out.grad.t11 += c0 * grad[s].x;
    out.grad.t12 += c0 * grad[s].y;
    out.grad.t21 += c1 * grad[s].x;
    out.grad.t22 += c1 * grad[s].y;
  }
  return out;
}

std::vector<double> interpolate_hdiv(const std::function<Tensor2(Vec2)>& field, const Mesh& mesh,
                                     Family family, int edge_quad_points,
                                     double origin_r_power) {
  if (!is_tensor_family(family)) throw std::invalid_argument("interpolate_hdiv needs a tensor family");
  const bool bdm = family == Family::BDM1Tensor;
  const auto& quad = edge_rule(edge_quad_points);
  auto at_origin = [](const Vec2& v) { return std::abs(v.x) < 1e-14 && std::abs(v.y) < 1e-14; };
  std::vector<double> coeffs((bdm ? 4 : 2) * mesh.n_edges(), 0.0);
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Vec2 A = mesh.vertices[mesh.edges[e].a];
    const Vec2 B = mesh.vertices[mesh.edges[e].b];
    const Vec2 n = edge_normal(mesh, e);
    double m0[2] = {0.0, 0.0}, m1[2] = {0.0, 0.0};
    const bool origin_a = origin_r_power < 0.0 && at_origin(A);
    const bool origin_b = origin_r_power < 0.0 && at_origin(B);
    if (origin_a || origin_b) {
      // Parameterise from the origin endpoint and substitute s = t^m with
      // m = 1/(1+power); the r^power factor then cancels exactly.
      const Vec2 O = origin_a ? A : B;
      const Vec2 E = origin_a ? B : A;
      const double m = 1.0 / (1.0 + origin_r_power);
      for (size_t q = 0; q < quad.points.size(); ++q) {
        const double t = quad.points[q];
        const double s = std::pow(t, m);
        const double w = quad.weights[q] * m * std::pow(t, m - 1.0);
        const Vec2 flux = field(O + (E - O) * s) * n;
        const double leg = origin_a ? 2.0 * s - 1.0 : 1.0 - 2.0 * s;
        m0[0] += w * flux.x;
        m0[1] += w * flux.y;
        m1[0] += w * leg * flux.x;
        m1[1] += w * leg * flux.y;
      }
    } else {
      for (size_t q = 0; q < quad.points.size(); ++q) {
        const double s = quad.points[q];
        const Vec2 flux = field(A + (B - A) * s) * n;
        m0[0] += quad.weights[q] * flux.x;
        m0[1] += quad.weights[q] * flux.y;
        m1[0] += quad.weights[q] * (2.0 * s - 1.0) * flux.x;
        m1[1] += quad.weights[q] * (2.0 * s - 1.0) * flux.y;
      }
    }
    if (bdm) {
      for (int r = 0; r < 2; ++r) {
        coeffs[4 * e + r] = m0[r];
        coeffs[4 * e + 2 + r] = m1[r];
      }
    } else {
      for (int r = 0; r < 2; ++r) coeffs[2 * e + r] = m0[r];
    }
  }
  return coeffs;
}

double weighted_trace_integral(const std::vector<double>& coeffs, const DofMap& dm,
                               const Mesh& mesh, const Viscosity& nu) {
  const auto& rule = triangle_rule(2);
  double total = 0.0;
  std::array<Vec2, 6> w;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const ElementGeometry g = geometry(mesh, k);
    const CellBasis basis(mesh, dm, k, g);
    const double inv_nu = 1.0 / nu(mesh.triangles[k].label);
    double acc = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto& p = rule.points[q];
      basis.eval_hdiv(g.point(p.l0, p.l1, p.l2), w.data());
      double tr = 0.0;
      for (int s = 0; s < basis.n_scalar(); ++s) {
        const int slot = dm.cell_scalar[k][s];
        tr += coeffs[2 * slot] * w[s].x + coeffs[2 * slot + 1] * w[s].y;
      }
      acc += rule.weights[q] * tr;
    }
    total += inv_nu * g.area * acc;
  }
  return total;
}

double trace_correction(std::vector<double>& coeffs, const DofMap& dm, const Mesh& mesh,
                        const Viscosity& nu) {
  if (!is_tensor_family(dm.family)) throw std::invalid_argument("trace_correction needs a tensor family");
  double weighted_one = 0.0;
  for (int k = 0; k < mesh.n_triangles(); ++k)
    weighted_one += geometry(mesh, k).area / nu(mesh.triangles[k].label);
  const double phi = weighted_trace_integral(coeffs, dm, mesh, nu) / (2.0 * weighted_one);
  // I is representable exactly: mean normal flux of row r across e is n_r,
  // the first-moment coefficients are zero.
  const bool bdm = dm.family == Family::BDM1Tensor;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    const Vec2 n = edge_normal(mesh, e);
    const int base = bdm ? 4 * e : 2 * e;
    coeffs[base] -= phi * n.x;
    coeffs[base + 1] -= phi * n.y;
  }
  return phi;
}

std::vector<double> l2_project(const std::function<Vec2(Vec2)>& field, const Mesh& mesh,
                               Family family, bool singular_origin) {
  if (is_tensor_family(family)) throw std::invalid_argument("l2_project needs a Lagrange family");
  const DofMap dm = build_dof_map(mesh, family);
  const auto& mass_rule = triangle_rule(6);
  const auto& rhs_rule = triangle_rule(10);

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::VectorXd bx = Eigen::VectorXd::Zero(dm.n_scalar);
  Eigen::VectorXd by = Eigen::VectorXd::Zero(dm.n_scalar);
  std::array<double, 6> val;
  std::array<Vec2, 6> grad;
  for (int k = 0; k < mesh.n_triangles(); ++k) {
    const ElementGeometry g = geometry(mesh, k);
    const CellBasis basis(mesh, dm, k, g);
    const int ns = basis.n_scalar();
    // mass block
    std::array<std::array<double, 6>, 6> m{};
    for (size_t q = 0; q < mass_rule.points.size(); ++q) {
      const auto& p = mass_rule.points[q];
      basis.eval_lagrange(p.l0, p.l1, p.l2, val.data(), grad.data());
      for (int i = 0; i < ns; ++i)
        for (int j = 0; j < ns; ++j) m[i][j] += mass_rule.weights[q] * val[i] * val[j];
    }
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < ns; ++j)
        trips.emplace_back(dm.cell_scalar[k][i], dm.cell_scalar[k][j], g.area * m[i][j]);
    // right-hand side
    const int sing = singular_origin ? origin_local_vertex(g) : -1;
    for (int i = 0; i < ns; ++i) {
      auto integrand = [&](const Vec2& x, double l0, double l1, double l2) {
        basis.eval_lagrange(l0, l1, l2, val.data(), grad.data());
        const Vec2 f = field(x);
        return Vec2{f.x * val[i], f.y * val[i]};
      };
      Vec2 r{0.0, 0.0};
      if (sing < 0) {
        for (size_t q = 0; q < rhs_rule.points.size(); ++q) {
          const auto& p = rhs_rule.points[q];
          r += rhs_rule.weights[q] * integrand(g.point(p.l0, p.l1, p.l2), p.l0, p.l1, p.l2);
        }
        r = r * g.area;
      } else {
        const std::array<Vec2, 3> tri = {g.vertex[sing], g.vertex[(sing + 1) % 3],
                                         g.vertex[(sing + 2) % 3]};
        r.x = integrate_corner_singular(tri, [&](const Vec2& x) {
          const auto l = g.barycentric(x);
          return integrand(x, l[0], l[1], l[2]).x;
        });
        r.y = integrate_corner_singular(tri, [&](const Vec2& x) {
          const auto l = g.barycentric(x);
          return integrand(x, l[0], l[1], l[2]).y;
        });
      }
      bx(dm.cell_scalar[k][i]) += r.x;
      by(dm.cell_scalar[k][i]) += r.y;
    }
  }
  Eigen::SparseMatrix<double> M(dm.n_scalar, dm.n_scalar);
  M.setFromTriplets(trips.begin(), trips.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(M);
  if (solver.info() != Eigen::Success) throw std::runtime_error("mass matrix factorisation failed");
  const Eigen::VectorXd ux = solver.solve(bx);
  const Eigen::VectorXd uy = solver.solve(by);
  std::vector<double> coeffs(dm.n_dofs);
  for (int s = 0; s < dm.n_scalar; ++s) {
    coeffs[2 * s] = ux(s);
    coeffs[2 * s + 1] = uy(s);
  }
  return coeffs;
}

}  // namespace amstokes
