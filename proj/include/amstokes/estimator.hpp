#pragma once

#include <functional>
#include <vector>

#include "amstokes/assembly.hpp"
#include "amstokes/fespace.hpp"
#include "amstokes/mesh.hpp"
#include "amstokes/parallel.hpp"

namespace amstokes {

/// Closed-form flow fields used as data and as the error reference.
struct ExactFlow {
  std::function<Vec2(Vec2)> velocity;
  std::function<Tensor2(Vec2)> velocity_gradient;
  std::function<Tensor2(Vec2)> stress;
  std::function<Vec2(Vec2)> body_force;  // f = -div(stress)
  bool singular_origin = false;          // grade quadrature toward the origin
  double origin_r_power = 0.0;           // stress growth r^power at the origin
};

struct Estimate {
  std::vector<double> local;  // eta_{theta,K}
  double global = 0.0;        // sqrt(sum of squares)
};

/// Least-squares-functional indicators of a discrete solution,
/// element-wise degree-6 quadrature.
Estimate estimate(const Mesh& mesh, const DofMap& sigma_dm, const DofMap& u_dm,
                  const Viscosity& nu, ThetaMode theta, const DiscreteSolution& sol,
                  const std::function<Vec2(Vec2)>& body_force, Exec exec = Exec::Parallel);

/// Minimal-cardinality bulk marking: smallest set carrying the requested
/// fraction of the squared estimator, greedy on descending indicators with
/// index ties.
std::vector<int> dorfler_mark(const Estimate& est, double fraction);

/// ||| (sigma - sigma_h, u - u_h) |||_{eg,theta}. Degree-10 quadrature,
/// graded toward the origin on elements touching it.
double energy_error(const Mesh& mesh, const DofMap& sigma_dm, const DofMap& u_dm,
                    const Viscosity& nu, ThetaMode theta, const DiscreteSolution& sol,
                    const ExactFlow& exact, Exec exec = Exec::Parallel);

/// ||| (sigma, u) |||_{eg,theta} of the exact pair (rel-err denominator).
double exact_energy_norm(const Mesh& mesh, const Viscosity& nu, ThetaMode theta,
                         const ExactFlow& exact, Exec exec = Exec::Parallel);

/// phi(sigma, nu) of the exact stress: the constant trace shift that moves it
/// into the weighted zero-trace space.
double stress_trace_shift(const Mesh& mesh, const Viscosity& nu, const ExactFlow& exact);

/// ||| (sigma~ - I_{h,nu} sigma, u - P_h u) |||_{full,theta}: best-approximation
/// reference with the trace-corrected edge-moment interpolant and the global
/// L2 projection; sigma~ is the exact stress shifted into the weighted
/// zero-trace space.
double interpolation_full_error(const Mesh& mesh, SpacePair spaces, const Viscosity& nu,
                                ThetaMode theta, const ExactFlow& exact,
                                Exec exec = Exec::Parallel);

/// Norms of discrete pairs (coefficient vectors), exact quadrature.
double discrete_energy_norm(const Mesh& mesh, const DofMap& sigma_dm, const DofMap& u_dm,
                            const Viscosity& nu, ThetaMode theta,
                            const std::vector<double>& sigma, const std::vector<double>& u);
double discrete_full_norm(const Mesh& mesh, const DofMap& sigma_dm, const DofMap& u_dm,
                          const Viscosity& nu, ThetaMode theta, const std::vector<double>& sigma,
                          const std::vector<double>& u);

/// Max relative normal-component jump of an H(div) coefficient field over
/// interior edges, sampled at edge Gauss points.
double normal_jump_audit(const Mesh& mesh, const DofMap& dm, const std::vector<double>& coeffs);

/// One adaptive-loop record.
struct ErrorReport {
  int loop = 0;
  int elements = 0;
  int dofs = 0;
  double eta = 0.0;
  double energy_err = 0.0;
  double interp_full_err = 0.0;
  double rel_err = 0.0;
  double ind_err = 0.0;
  double eff_index = 0.0;
};

}  // namespace amstokes
