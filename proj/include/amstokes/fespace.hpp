#pragma once

#include <array>
#include <functional>
#include <vector>

#include "amstokes/mesh.hpp"
#include "amstokes/tensor.hpp"

namespace amstokes {

enum class Family { RT0Tensor, BDM1Tensor, P1Vector, P2Vector };

inline bool is_tensor_family(Family f) {
  return f == Family::RT0Tensor || f == Family::BDM1Tensor;
}

/// Piecewise-constant viscosity, one value per quadrant subdomain.
struct Viscosity {
  std::array<double, 4> nu = {1.0, 1.0, 1.0, 1.0};
  double operator()(int label) const { return nu[label - 1]; }
};

/// Degree-of-freedom layout. Every family is organised as global "scalar
/// slots" duplicated over two components: dof = 2 * slot + comp. For tensor
/// families comp is the row; slots are edges (RT0) or edge-moment pairs
/// (BDM1), with all edge functionals taken against the global edge direction
/// (from the lower to the higher vertex index), so no orientation signs appear
/// in the scatter. For Lagrange families comp is the velocity component and
/// slots are vertices (P1) or vertices then edges (P2).
struct DofMap {
  Family family = Family::P1Vector;
  int n_scalar = 0;
  int n_dofs = 0;
  int scalars_per_cell = 0;
  int dofs_per_cell = 0;
  std::vector<std::array<int, 6>> cell_scalar;  // first scalars_per_cell entries used
  std::vector<char> scalar_on_boundary;         // Lagrange families only

  int cell_dof(int cell, int local_scalar, int comp) const {
    return 2 * cell_scalar[cell][local_scalar] + comp;
  }
};

DofMap build_dof_map(const Mesh& mesh, Family family);

/// Interpolation node of a Lagrange scalar slot (vertex, or edge midpoint).
Vec2 scalar_node_position(const Mesh& mesh, Family family, int slot);

/// Local basis of one element. Tensor families evaluate at physical points,
/// Lagrange families at barycentric coordinates; both orderings match DofMap
/// (local dof = 2 * local_scalar + comp).
class CellBasis {
 public:
  CellBasis(const Mesh& mesh, const DofMap& dm, int cell, const ElementGeometry& geom);

  Family family() const { return family_; }
  int n_scalar() const { return n_scalar_; }
  int n_dofs() const { return 2 * n_scalar_; }

  /// Vector-valued scalar-slot functions of an H(div) family; the tensor
  /// basis for local dof 2s+r has row r equal to function s. div is constant
  /// per function.
  void eval_hdiv(const Vec2& p, Vec2* value) const;
  const std::array<double, 6>& hdiv_div() const { return div_; }

  /// Scalar Lagrange functions and gradients at barycentric coordinates.
  void eval_lagrange(double l0, double l1, double l2, double* value, Vec2* grad) const;

 private:
  Family family_;
  int n_scalar_ = 0;
  ElementGeometry geom_;
  // RT0: opposite vertex and sign*|e|/(2A) scale per edge.
  std::array<Vec2, 3> rt_opp_;
  std::array<double, 3> rt_scale_;
  // BDM1: column c holds the monomial coefficients (a0,a1,a2,b0,b1,b2) of
  // basis function c, i.e. v = (a0 + a1 x + a2 y, b0 + b1 x + b2 y).
  std::array<std::array<double, 6>, 6> bdm_coef_;
  std::array<double, 6> div_ = {};
};

/// Tensor-valued field evaluated from H(div) coefficients, plus divergence.
struct HdivFieldValue {
  Tensor2 value;
  Vec2 divergence;
};

HdivFieldValue eval_hdiv_field(const CellBasis& basis, const DofMap& dm, int cell,
                               const std::vector<double>& coeffs, const Vec2& p);

struct VelocityFieldValue {
  Vec2 value;
  Tensor2 grad;  // grad[c][j] = d v_c / d x_j
};

VelocityFieldValue eval_lagrange_field(const CellBasis& basis, const DofMap& dm, int cell,
                                       const std::vector<double>& coeffs, double l0, double l1,
                                       double l2);

/// Canonical edge-moment interpolation into RT0Tensor or BDM1Tensor.
/// edge_quad_points is the Gauss point count per edge (>= 4 per contract).
/// origin_r_power < 0 declares a field behaving like r^power at the origin;
/// moments of edges emanating from the origin are then computed under the
/// power substitution that makes the integrand smooth (edges from a mesh
/// vertex at the origin are radial, so the substitution is exact there).
std::vector<double> interpolate_hdiv(const std::function<Tensor2(Vec2)>& field, const Mesh& mesh,
                                     Family family, int edge_quad_points = 8,
                                     double origin_r_power = 0.0);

/// Subtracts phi * I with phi = (tr tau, nu^-1) / (d (1, nu^-1)) so the
/// nu-weighted trace integral of the corrected field vanishes. Returns phi.
double trace_correction(std::vector<double>& coeffs, const DofMap& dm, const Mesh& mesh,
                        const Viscosity& nu);

/// Weighted trace integral (tr tau_h, nu^-1) of an H(div) coefficient vector.
double weighted_trace_integral(const std::vector<double>& coeffs, const DofMap& dm,
                               const Mesh& mesh, const Viscosity& nu);

/// Global L2 projection onto P1Vector or P2Vector (no boundary conditions).
/// singular_origin enables graded quadrature on elements touching the origin.
std::vector<double> l2_project(const std::function<Vec2(Vec2)>& field, const Mesh& mesh,
                               Family family, bool singular_origin = false);

}  // namespace amstokes
