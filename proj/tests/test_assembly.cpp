#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <memory>
#include <random>

#include "amstokes/assembly.hpp"
#include "amstokes/estimator.hpp"
#include "amstokes/integrate.hpp"
#include "amstokes/kellogg.hpp"
#include "amstokes/quadrature.hpp"

using namespace amstokes;

namespace {

ProblemData kellogg_problem(int id, SpacePair spaces, ThetaMode theta = ThetaMode::Constant1,
                            Variant variant = Variant::NonSymmetric) {
  const KelloggData& d = dataset(id);
  auto sol = std::make_shared<KelloggSolution>(d);
  ProblemData data;
  data.nu.nu = d.nu;
  data.body_force = [](Vec2) { return Vec2{0.0, 0.0}; };
  data.dirichlet = [sol](Vec2 x) { return sol->eval(x).u; };
  data.variant = variant;
  data.theta = theta;
  data.spaces = spaces;
  return data;
}

// Polynomial exact pairs with uniform viscosity and weighted-zero-mean
// pressure p = x + y.
// Linear pair (P1-representable boundary data): u = (y, x), f = (1, 1).
Vec2 lin_u(Vec2 x) { return {x.y, x.x}; }
Tensor2 lin_sigma(Vec2 x) {
  const double p = x.x + x.y;
  return {-p, 1.0, 1.0, -p};
}
Vec2 lin_f(Vec2) { return {1.0, 1.0}; }
// Quadratic pair (BDM1 x P2 representable): u = (y^2, x^2), f = 0.
Vec2 quad_u(Vec2 x) { return {x.y * x.y, x.x * x.x}; }
Tensor2 quad_sigma(Vec2 x) {
  const double off = x.x + x.y;
  return {-off, off, off, -off};
}
Vec2 quad_f(Vec2) { return {0.0, 0.0}; }

std::vector<double> random_pair(const LinearSystem& sys, std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> x(sys.dim() - 1);
  for (auto& v : x) v = N(rng);
  return x;
}

void split_pair(const LinearSystem& sys, const DofMap& udm, const std::vector<double>& x,
                std::vector<double>& sigma, std::vector<double>& u) {
  sigma.assign(x.begin(), x.begin() + sys.n_sigma);
  u.assign(udm.n_dofs, 0.0);
  for (int dof = 0; dof < udm.n_dofs; ++dof)
    if (sys.u_free_index[dof] >= 0) u[dof] = x[sys.n_sigma + sys.u_free_index[dof]];
}

}  // namespace

TEST_CASE("assembled dimensions") {
  const Mesh m = build_structured_mesh(2);
  const ProblemData data = kellogg_problem(1, rt0_p1());
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const LinearSystem sys = assemble(m, sdm, udm, data);
  CHECK(sys.dim() == 131);  // 112 sigma + (50 - 32) free velocity + 1 multiplier
  CHECK(sys.n_sigma == 112);
  CHECK(sys.n_u_free == 18);
}

TEST_CASE("local block against an independent seven-term quadrature oracle") {
  // Assemble each term of the bilinear form separately with an independent
  // dense quadrature and compare against local_system, for scaled nu.
  const Mesh m = build_structured_mesh(2);
  for (double nu_scale : {1.0, 7.5}) {
    for (Variant variant : {Variant::NonSymmetric, Variant::Symmetric}) {
      ProblemData data = kellogg_problem(1, rt0_p1(), ThetaMode::MeshSquared, variant);
      for (auto& v : data.nu.nu) v *= nu_scale;
      const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
      const DofMap udm = build_dof_map(m, Family::P1Vector);
      const int cell = 9;
      const LocalSystem ls = local_system(m, sdm, udm, cell, data);

      const ElementGeometry g = geometry(m, cell);
      const CellBasis sb(m, sdm, cell, g);
      const CellBasis ub(m, udm, cell, g);
      const double nu = data.nu(m.triangles[cell].label);
      const double theta = g.diameter * g.diameter;
      const double usign = variant == Variant::Symmetric ? -1.0 : 1.0;
      const auto& rule = triangle_rule(8);  // independent, higher degree

      const int n = ls.n_sigma + ls.n_u;
      std::vector<double> oracle(n * n, 0.0);
      for (size_t q = 0; q < rule.points.size(); ++q) {
        const auto& p = rule.points[q];
        const Vec2 x = g.point(p.l0, p.l1, p.l2);
        const double w = rule.weights[q] * g.area;
        std::array<Vec2, 6> wv;
        sb.eval_hdiv(x, wv.data());
        std::array<double, 6> nv;
        std::array<Vec2, 6> gv;
        ub.eval_lagrange(p.l0, p.l1, p.l2, nv.data(), gv.data());
        auto tau = [&](int j) {
          const Vec2 v = wv[j / 2];
          return j % 2 == 0 ? Tensor2{v.x, v.y, 0, 0} : Tensor2{0, 0, v.x, v.y};
        };
        auto divtau = [&](int j) {
          return j % 2 == 0 ? Vec2{sb.hdiv_div()[j / 2], 0} : Vec2{0, sb.hdiv_div()[j / 2]};
        };
        auto epsv = [&](int j) {
          const Vec2 gr = gv[j / 2];
          return j % 2 == 0 ? sym_part(Tensor2{gr.x, gr.y, 0, 0})
                            : sym_part(Tensor2{0, 0, gr.x, gr.y});
        };
        for (int i = 0; i < ls.n_sigma; ++i) {
          for (int j = 0; j < ls.n_sigma; ++j)
            oracle[i * n + j] += w * (ddot(dev(tau(j)), tau(i)) / nu +
                                      theta / nu * divtau(j).dot(divtau(i)));
          for (int j = 0; j < ls.n_u; ++j)
            oracle[i * n + ls.n_sigma + j] +=
                w * (-2.0 * ddot(epsv(j), tau(i)) + ddot(dev(tau(i)), epsv(j)));
        }
        for (int i = 0; i < ls.n_u; ++i) {
          for (int j = 0; j < ls.n_sigma; ++j)
            oracle[(ls.n_sigma + i) * n + j] +=
                w * usign * (2.0 * ddot(tau(j), epsv(i)) - ddot(dev(tau(j)), epsv(i)));
          for (int j = 0; j < ls.n_u; ++j)
            oracle[(ls.n_sigma + i) * n + ls.n_sigma + j] +=
                w * usign * nu * ddot(epsv(j), epsv(i));
        }
      }
      double scale = 0.0, diff = 0.0;
      for (int i = 0; i < n * n; ++i) {
        scale = std::max(scale, std::abs(oracle[i]));
        diff = std::max(diff, std::abs(oracle[i] - ls.matrix[i]));
      }
      CHECK(diff <= 1e-12 * scale);

      if (variant == Variant::Symmetric) {
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j)
            CHECK(std::abs(ls.at(i, j) - ls.at(j, i)) <= 1e-13 * (scale + 1.0));
      }
    }
  }
}

TEST_CASE("symmetric and non-symmetric blocks differ by the velocity test sign") {
  const Mesh m = build_structured_mesh(2);
  const ProblemData a = kellogg_problem(2, rt0_p1(), ThetaMode::Constant1, Variant::NonSymmetric);
  ProblemData b = a;
  b.variant = Variant::Symmetric;
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const LocalSystem la = local_system(m, sdm, udm, 3, a);
  const LocalSystem lb = local_system(m, sdm, udm, 3, b);
  const int n = la.n_sigma + la.n_u;
  for (int i = 0; i < n; ++i) {
    const double sgn = i < la.n_sigma ? 1.0 : -1.0;
    for (int j = 0; j < n; ++j) CHECK(lb.at(i, j) == doctest::Approx(sgn * la.at(i, j)));
    CHECK(lb.rhs[i] == doctest::Approx(sgn * la.rhs[i]));
  }
}

TEST_CASE("elementwise coercivity identity") {
  const Mesh m = build_structured_mesh(2);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> N(0.0, 1.0);
  for (ThetaMode theta : {ThetaMode::Constant1, ThetaMode::MeshSquared}) {
    const ProblemData data = kellogg_problem(5, bdm1_p2(), theta);
    const DofMap sdm = build_dof_map(m, Family::BDM1Tensor);
    const DofMap udm = build_dof_map(m, Family::P2Vector);
    const int cell = 13;
    const LocalSystem ls = local_system(m, sdm, udm, cell, data);
    const int n = ls.n_sigma + ls.n_u;
    std::vector<double> x(n);
    for (auto& v : x) v = N(rng);
    double quad = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) quad += x[i] * ls.at(i, j) * x[j];

    // reference: element contribution of the energy norm squared
    const ElementGeometry g = geometry(m, cell);
    const CellBasis sb(m, sdm, cell, g);
    const CellBasis ub(m, udm, cell, g);
    const double nu = data.nu(m.triangles[cell].label);
    const double th = theta_value(theta, g);
    const auto& rule = triangle_rule(8);
    double norm2 = 0.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto& p = rule.points[q];
      const Vec2 xq = g.point(p.l0, p.l1, p.l2);
      std::array<Vec2, 6> wv;
      sb.eval_hdiv(xq, wv.data());
      std::array<double, 6> nv;
      std::array<Vec2, 6> gv;
      ub.eval_lagrange(p.l0, p.l1, p.l2, nv.data(), gv.data());
      Tensor2 sig{};
      Vec2 div{};
      Tensor2 grad{};
      for (int s = 0; s < sb.n_scalar(); ++s) {
        sig.t11 += x[2 * s] * wv[s].x;
        sig.t12 += x[2 * s] * wv[s].y;
        sig.t21 += x[2 * s + 1] * wv[s].x;
        sig.t22 += x[2 * s + 1] * wv[s].y;
        div.x += x[2 * s] * sb.hdiv_div()[s];
        div.y += x[2 * s + 1] * sb.hdiv_div()[s];
      }
      for (int s = 0; s < ub.n_scalar(); ++s) {
        grad.t11 += x[ls.n_sigma + 2 * s] * gv[s].x;
        grad.t12 += x[ls.n_sigma + 2 * s] * gv[s].y;
        grad.t21 += x[ls.n_sigma + 2 * s + 1] * gv[s].x;
        grad.t22 += x[ls.n_sigma + 2 * s + 1] * gv[s].y;
      }
      const Tensor2 eps = sym_part(grad);
      const Tensor2 ds = dev(sig);
      norm2 += rule.weights[q] * g.area *
               (nu * ddot(eps, eps) + ddot(ds, ds) / nu + th / nu * div.dot(div));
    }
    CHECK(std::abs(quad - norm2) <= 1e-12 * norm2);
  }
}

TEST_CASE("zero data gives the zero solution") {
  const Mesh m = build_structured_mesh(2);
  ProblemData data = kellogg_problem(1, rt0_p1());
  data.body_force = [](Vec2) { return Vec2{0.0, 0.0}; };
  data.dirichlet = [](Vec2) { return Vec2{0.0, 0.0}; };
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const DiscreteSolution sol = solve(assemble(m, sdm, udm, data));
  for (double v : sol.sigma) CHECK(std::abs(v) <= 1e-12);
  for (double v : sol.u) CHECK(std::abs(v) <= 1e-12);
  CHECK(std::abs(sol.multiplier) <= 1e-12);
}

TEST_CASE("solve: identity and random SPD against a dense oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> N(0.0, 1.0);

  LinearSystem sys;
  const int n = 50;
  sys.n_sigma = n - 1;
  sys.n_u_free = 0;
  sys.u_free_index = {};
  sys.dirichlet_value = {};
  Eigen::MatrixXd R(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) R(i, j) = N(rng);
  const Eigen::MatrixXd S = R.transpose() * R + 5.0 * Eigen::MatrixXd::Identity(n, n);
  sys.A = S.sparseView();
  sys.rhs = Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return N(rng); });

  const DiscreteSolution sol = solve(sys);
  CHECK(sol.residual <= 1e-10);
  const Eigen::VectorXd oracle = S.ldlt().solve(sys.rhs);
  for (int i = 0; i < n - 1; ++i) CHECK(sol.sigma[i] == doctest::Approx(oracle(i)).epsilon(1e-9));
  CHECK(sol.multiplier == doctest::Approx(oracle(n - 1)).epsilon(1e-9));

  // identity matrix returns the right-hand side
  sys.A = Eigen::MatrixXd::Identity(n, n).sparseView();
  const DiscreteSolution id = solve(sys);
  for (int i = 0; i < n - 1; ++i) CHECK(id.sigma[i] == doctest::Approx(sys.rhs(i)));
}

TEST_CASE("Galerkin consistency for a polynomial exact pair") {
  // Uniform viscosity; the exact fields are evaluated against every basis
  // function with an independent quadrature and must match the load.
  const Mesh m = build_structured_mesh(4);
  ProblemData data;
  data.nu = Viscosity{};
  data.body_force = lin_f;
  data.dirichlet = lin_u;
  data.spaces = rt0_p1();
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const LinearSystem sys = assemble(m, sdm, udm, data);
  const DiscreteSolution sol = solve(sys);
  CHECK(sol.residual <= 1e-10);

  // B((sigma,u),(tau,v)) - F(tau,v) over all discrete test functions, via
  // element quadrature of the exact fields (degree 10, independent path).
  // F is rebuilt here rather than taken from the assembled right-hand side,
  // which additionally carries the Dirichlet lift.
  Eigen::VectorXd resid = Eigen::VectorXd::Zero(sys.dim());
  const auto& rule = triangle_rule(10);
  for (int k = 0; k < m.n_triangles(); ++k) {
    const ElementGeometry g = geometry(m, k);
    const CellBasis sb(m, sdm, k, g);
    const CellBasis ub(m, udm, k, g);
    const double nu = 1.0;
    const double theta = 1.0;
    for (size_t q = 0; q < rule.points.size(); ++q) {
      const auto& p = rule.points[q];
      const Vec2 x = g.point(p.l0, p.l1, p.l2);
      const double w = rule.weights[q] * g.area;
      const Tensor2 sig = lin_sigma(x);
      const Tensor2 eps{0.0, 1.0, 1.0, 0.0};
      std::array<Vec2, 6> wv;
      sb.eval_hdiv(x, wv.data());
      std::array<double, 6> nv;
      std::array<Vec2, 6> gv;
      ub.eval_lagrange(p.l0, p.l1, p.l2, nv.data(), gv.data());
      for (int i = 0; i < sb.n_dofs(); ++i) {
        const Vec2 v = wv[i / 2];
        const Tensor2 tau = i % 2 == 0 ? Tensor2{v.x, v.y, 0, 0} : Tensor2{0, 0, v.x, v.y};
        const Vec2 dtau = i % 2 == 0 ? Vec2{sb.hdiv_div()[i / 2], 0} : Vec2{0, sb.hdiv_div()[i / 2]};
        // test rows with tau: (nu^-1 A sigma, tau) - 2(eps(u), tau)
        //                     + (A tau, eps(u)) + theta (nu^-1 div sigma, div tau)
        double val = ddot(dev(sig), tau) / nu - 2.0 * ddot(eps, tau) + ddot(dev(tau), eps) +
                     theta / nu * (lin_f(x) * -1.0).dot(dtau);
        val -= -theta / nu * lin_f(x).dot(dtau);  // minus F_sigma
        resid(2 * sdm.cell_scalar[k][i / 2] + i % 2) += w * val;
      }
      for (int i = 0; i < ub.n_dofs(); ++i) {
        const int fidx = sys.u_free_index[2 * udm.cell_scalar[k][i / 2] + i % 2];
        if (fidx < 0) continue;
        const Vec2 gr = gv[i / 2];
        const Tensor2 grad = i % 2 == 0 ? Tensor2{gr.x, gr.y, 0, 0} : Tensor2{0, 0, gr.x, gr.y};
        const Tensor2 epsv = sym_part(grad);
        double val = 2.0 * ddot(sig, epsv) - ddot(dev(sig), epsv) + nu * ddot(eps, epsv);
        Vec2 vv = i % 2 == 0 ? Vec2{nv[i / 2], 0.0} : Vec2{0.0, nv[i / 2]};
        val -= 2.0 * lin_f(x).dot(vv);  // minus F_u
        resid(sys.n_sigma + fidx) += w * val;
      }
    }
  }
  // the multiplier row audits the weighted trace of the exact stress
  double trace_norm = 0.0;
  for (int i = 0; i < sys.dim() - 1; ++i) trace_norm = std::max(trace_norm, std::abs(resid(i)));
  CHECK(trace_norm <= 1e-9);
}

TEST_CASE("polynomial solution is reproduced exactly by BDM1 x P2") {
  const Mesh m = build_structured_mesh(2);
  ProblemData data;
  data.nu = Viscosity{};
  data.body_force = quad_f;
  data.dirichlet = quad_u;
  data.spaces = bdm1_p2();
  const DofMap sdm = build_dof_map(m, Family::BDM1Tensor);
  const DofMap udm = build_dof_map(m, Family::P2Vector);
  const DiscreteSolution sol = solve(assemble(m, sdm, udm, data));
  // sigma and u are in the discrete spaces (linear sigma, quadratic u), so
  // the discrete solution matches the interpolants to solver accuracy.
  const auto sref = interpolate_hdiv(quad_sigma, m, Family::BDM1Tensor);
  for (size_t i = 0; i < sref.size(); ++i) CHECK(std::abs(sol.sigma[i] - sref[i]) <= 1e-8);
  for (int s = 0; s < udm.n_scalar; ++s) {
    const Vec2 u = quad_u(scalar_node_position(m, Family::P2Vector, s));
    CHECK(std::abs(sol.u[2 * s] - u.x) <= 1e-8);
    CHECK(std::abs(sol.u[2 * s + 1] - u.y) <= 1e-8);
  }
  // the augmentation terms vanish on the exact coefficients
  Estimate est = estimate(m, sdm, udm, data.nu, ThetaMode::Constant1, sol, data.body_force);
  CHECK(est.global <= 1e-8);
}

TEST_CASE("variant equivalence on Data2") {
  const Mesh m = build_structured_mesh(4);
  const ProblemData a = kellogg_problem(2, rt0_p1(), ThetaMode::Constant1, Variant::NonSymmetric);
  ProblemData b = a;
  b.variant = Variant::Symmetric;
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const DiscreteSolution sa = solve(assemble(m, sdm, udm, a));
  const DiscreteSolution sb = solve(assemble(m, sdm, udm, b));
  double scale = 0.0;
  for (double v : sa.sigma) scale = std::max(scale, std::abs(v));
  for (size_t i = 0; i < sa.sigma.size(); ++i)
    CHECK(std::abs(sa.sigma[i] - sb.sigma[i]) <= 1e-8 * scale);
  for (size_t i = 0; i < sa.u.size(); ++i) CHECK(std::abs(sa.u[i] - sb.u[i]) <= 1e-8 * scale);
}

TEST_CASE("coercivity, continuity and inf-sup on random discrete pairs") {
  const Mesh m = build_structured_mesh(2);
  std::mt19937_64 rng(41);
  for (int id : {1, 5}) {
    for (ThetaMode theta : {ThetaMode::Constant1, ThetaMode::MeshSquared}) {
      for (SpacePair spaces : {rt0_p1(), bdm1_p2()}) {
        ProblemData data = kellogg_problem(id, spaces, theta);
        const DofMap sdm = build_dof_map(m, spaces.sigma);
        const DofMap udm = build_dof_map(m, spaces.velocity);
        const LinearSystem sys = assemble(m, sdm, udm, data);
        data.variant = Variant::Symmetric;
        const LinearSystem sym = assemble(m, sdm, udm, data);
        for (int trial = 0; trial < 10; ++trial) {
          const auto x = random_pair(sys, rng);
          const auto y = random_pair(sys, rng);
          std::vector<double> xs, xu, ys, yu;
          split_pair(sys, udm, x, xs, xu);
          split_pair(sys, udm, y, ys, yu);
          const double eg_x = discrete_energy_norm(m, sdm, udm, data.nu, theta, xs, xu);
          const double full_y = discrete_full_norm(m, sdm, udm, data.nu, theta, ys, yu);

          const double Bxx = apply_form(sys, x, x);
          CHECK(std::abs(Bxx - eg_x * eg_x) <= 1e-10 * eg_x * eg_x);

          const double Bxy = apply_form(sys, x, y);
          CHECK(Bxy <= 2.0 * eg_x * full_y + 1e-10);

          // inf-sup witness: B_sym((x),(sigma_x,-u_x)) equals the energy norm
          auto yflip = x;
          for (int i = sys.n_sigma; i < (int)x.size(); ++i) yflip[i] = -x[i];
          const double witness = apply_form(sym, x, yflip);
          CHECK(std::abs(witness - eg_x * eg_x) <= 1e-10 * eg_x * eg_x);
        }
      }
    }
  }
}

TEST_CASE("weighted trace constraint is enforced") {
  const Mesh m = build_structured_mesh(2);
  const ProblemData data = kellogg_problem(1, rt0_p1());
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const DiscreteSolution sol = solve(assemble(m, sdm, udm, data));
  CHECK(std::abs(weighted_trace_integral(sol.sigma, sdm, m, data.nu)) <= 1e-10);
}

TEST_CASE("parallel and serial assembly agree bitwise") {
  const Mesh m = build_structured_mesh(4);
  const ProblemData data = kellogg_problem(3, rt0_p1(), ThetaMode::MeshSquared);
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const LinearSystem a = assemble(m, sdm, udm, data, Exec::Serial);
  const LinearSystem b = assemble(m, sdm, udm, data, Exec::Parallel);
  REQUIRE(a.A.nonZeros() == b.A.nonZeros());
  for (int k = 0; k < a.A.outerSize(); ++k) {
    Eigen::SparseMatrix<double>::InnerIterator ia(a.A, k), ib(b.A, k);
    for (; ia && ib; ++ia, ++ib) CHECK(ia.value() == ib.value());
  }
  CHECK((a.rhs - b.rhs).norm() == 0.0);
}

TEST_CASE("matrix market dump") {
  const Mesh m = build_structured_mesh(2);
  const ProblemData data = kellogg_problem(1, rt0_p1());
  const DofMap sdm = build_dof_map(m, Family::RT0Tensor);
  const DofMap udm = build_dof_map(m, Family::P1Vector);
  const LinearSystem sys = assemble(m, sdm, udm, data);
  sys.write_matrix_market("/tmp/amstokes_mm_test.mtx");
  std::ifstream f("/tmp/amstokes_mm_test.mtx");
  std::string line;
  std::getline(f, line);
  CHECK(line == "%%MatrixMarket matrix coordinate real general");
}
