#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "amstokes/tensor.hpp"

namespace amstokes {

/// Parameters of the singular interface benchmark on [-1,1]^2: velocity is
/// built from a piecewise-harmonic potential r^alpha (a_i sin + b_i cos,
/// c_i sin + d_i cos) per quadrant. The normalisation fixes d_4 = 1,
/// nu_2 = nu_4 = 1 and nu_1 = nu_3.
struct KelloggData {
  double alpha = 0.5;
  std::array<double, 4> nu = {1.0, 1.0, 1.0, 1.0};
  std::array<double, 4> a{}, b{}, c{}, d{};
};

/// The 16 interface-matching equations: first 8 from velocity continuity on
/// the four rays, last 8 from normal-stress continuity, evaluated verbatim in
/// that order. All are linear in (a,b,c,d).
std::array<double, 16> kellogg_residual(const KelloggData& p);

double max_abs_residual(const KelloggData& p);

struct NewtonReport {
  bool converged = false;
  double max_residual = 0.0;
  int iterations = 0;
  int seeds_tried = 0;
};

/// Damped Newton on the 16 unknowns (nu_1 and the free coefficients) with a
/// scaled finite-difference Jacobian. Without an initial guess, multistart
/// from random Gaussian seeds (budget 200). Throws on non-convergence with the
/// best residual in the message.
KelloggData solve_kellogg(double alpha, const std::optional<KelloggData>& init = std::nullopt,
                          NewtonReport* report = nullptr, std::uint64_t seed = 0);

/// Four-decimal published benchmark data, id in 1..5
/// (alpha = 0.13, 0.2, 0.3, 0.4, 0.5).
KelloggData dataset_seed(int id);

/// dataset_seed(id) re-solved to max residual <= 1e-10 (cached).
const KelloggData& dataset(int id);

/// Point evaluation of the exact solution fields.
class KelloggSolution {
 public:
  explicit KelloggSolution(KelloggData data) : data_(data) {}

  struct Value {
    Vec2 u;
    Tensor2 grad_u;
    double p = 0.0;
    Tensor2 sigma;
  };

  /// Quadrant resolved from the angle; on-axis points take the quadrant whose
  /// angular range starts there. The origin is rejected.
  Value eval(const Vec2& point) const;

  /// One-sided evaluation used by interface-jump checks.
  Value eval_polar(int quadrant, double r, double theta) const;

  /// Harmonic potential components in one quadrant (test hook).
  Vec2 potential(int quadrant, double r, double theta) const;

  /// Max over the given radii and the four interface rays of the scaled jumps
  /// of u and sigma.n, both one-sided limits compared.
  double max_interface_jump(const std::vector<double>& radii) const;

  const KelloggData& data() const { return data_; }

 private:
  KelloggData data_;
};

int quadrant_of_angle(double theta);

}  // namespace amstokes
