#pragma once

#include <Eigen/Sparse>

#include <functional>
#include <string>
#include <vector>

#include "amstokes/fespace.hpp"
#include "amstokes/mesh.hpp"
#include "amstokes/parallel.hpp"

namespace amstokes {

/// theta = 1, or theta|_K = h_K^2.
enum class ThetaMode { Constant1, MeshSquared };

enum class Variant { NonSymmetric, Symmetric };

struct SpacePair {
  Family sigma = Family::RT0Tensor;
  Family velocity = Family::P1Vector;
};

inline SpacePair rt0_p1() { return {Family::RT0Tensor, Family::P1Vector}; }
inline SpacePair bdm1_p2() { return {Family::BDM1Tensor, Family::P2Vector}; }

inline double theta_value(ThetaMode mode, const ElementGeometry& g) {
  return mode == ThetaMode::Constant1 ? 1.0 : g.diameter * g.diameter;
}

struct ProblemData {
  Viscosity nu;
  std::function<Vec2(Vec2)> body_force;  // f
  std::function<Vec2(Vec2)> dirichlet;   // g, interpolated at boundary nodes
  Variant variant = Variant::NonSymmetric;
  ThetaMode theta = ThetaMode::Constant1;
  SpacePair spaces;
};

/// Dense element block of the augmented bilinear form, rows/cols ordered
/// [local sigma dofs | local velocity dofs], plus the element load vector.
struct LocalSystem {
  int n_sigma = 0;
  int n_u = 0;
  std::vector<double> matrix;  // row-major (n_sigma+n_u)^2
  std::vector<double> rhs;
  std::vector<double> trace_weight;  // per sigma dof: integral of nu^-1 tr(basis)

  double& at(int i, int j) { return matrix[i * (n_sigma + n_u) + j]; }
  double at(int i, int j) const { return matrix[i * (n_sigma + n_u) + j]; }
};

LocalSystem local_system(const Mesh& mesh, const DofMap& sigma_dm, const DofMap& u_dm, int cell,
                         const ProblemData& data);

/// Global system after Dirichlet elimination, layout
/// [sigma dofs | free velocity dofs | trace multiplier].
struct LinearSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd rhs;
  int n_sigma = 0;
  int n_u_free = 0;
  std::vector<int> u_free_index;        // velocity dof -> reduced index, -1 if Dirichlet
  std::vector<double> dirichlet_value;  // velocity dof -> boundary value (0 if free)

  int dim() const { return n_sigma + n_u_free + 1; }
  void write_matrix_market(const std::string& path) const;
};

LinearSystem assemble(const Mesh& mesh, const DofMap& sigma_dm, const DofMap& u_dm,
                      const ProblemData& data, Exec exec = Exec::Parallel);

struct DiscreteSolution {
  std::vector<double> sigma;  // H(div) coefficients
  std::vector<double> u;      // full velocity coefficients, Dirichlet filled in
  double multiplier = 0.0;
  double residual = 0.0;  // relative algebraic residual
};

/// Sparse direct solve; throws if the factorisation fails or the relative
/// residual exceeds 1e-10.
DiscreteSolution solve(const LinearSystem& sys);

/// Quadratic/bilinear form evaluation through the assembled matrix:
/// B(trial, test) with sigma+free-velocity coefficient vectors (multiplier
/// coordinate excluded).
double apply_form(const LinearSystem& sys, const std::vector<double>& trial,
                  const std::vector<double>& test);

}  // namespace amstokes
