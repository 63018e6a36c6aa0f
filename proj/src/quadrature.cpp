#include "amstokes/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <map>
#include <mutex>
#include <stdexcept>

namespace amstokes {

namespace {

// Gauss nodes/weights for a weight function with known recurrence
// coefficients, via the Golub-Welsch eigenvalue method on [-1,1].
// diag[k], offdiag_sq[k] are the three-term recurrence coefficients,
// mass is the integral of the weight.
void golub_welsch(const std::vector<double>& diag, const std::vector<double>& offdiag_sq,
                  double mass, std::vector<double>& nodes, std::vector<double>& weights) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = diag[i];
  for (int i = 1; i < n; ++i) {
    const double b = std::sqrt(offdiag_sq[i]);
    J(i, i - 1) = b;
    J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    weights[i] = mass * v0 * v0;
  }
}

// Legendre weight 1 on [-1,1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  std::vector<double> diag(n, 0.0), off(n, 0.0);
  for (int k = 1; k < n; ++k) off[k] = (double)(k * k) / (4.0 * k * k - 1.0);
  golub_welsch(diag, off, 2.0, nodes, weights);
}

// Jacobi weight (1-x) on [-1,1].
void gauss_jacobi10(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  std::vector<double> diag(n, 0.0), off(n, 0.0);
  for (int k = 0; k < n; ++k) diag[k] = -1.0 / ((2.0 * k + 1.0) * (2.0 * k + 3.0));
  for (int k = 1; k < n; ++k) {
    const double d = 2.0 * k + 1.0;
    off[k] = (double)(k * (k + 1)) / (d * d);
  }
  golub_welsch(diag, off, 2.0, nodes, weights);
}

void add_orbit3(QuadratureRule& r, double a, double b, double w) {
  r.points.push_back({a, b, b});
  r.points.push_back({b, a, b});
  r.points.push_back({b, b, a});
  r.weights.insert(r.weights.end(), 3, w);
}

void add_orbit6(QuadratureRule& r, double a, double b, double c, double w) {
  r.points.push_back({a, b, c});
  r.points.push_back({a, c, b});
  r.points.push_back({b, a, c});
  r.points.push_back({b, c, a});
  r.points.push_back({c, a, b});
  r.points.push_back({c, b, a});
  r.weights.insert(r.weights.end(), 6, w);
}

QuadratureRule symmetric_rule(int degree) {
  QuadratureRule r;
  r.degree = degree;
  switch (degree) {
    case 1:
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(1.0);
      break;
    case 2:
      add_orbit3(r, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 4:
      add_orbit3(r, 0.108103018168070, 0.445948490915965, 0.223381589678011);
      add_orbit3(r, 0.816847572980459, 0.091576213509771, 0.109951743655322);
      break;
    case 5:
      r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weights.push_back(0.225);
      add_orbit3(r, 0.059715871789770, 0.470142064105115, 0.132394152788506);
      add_orbit3(r, 0.797426985353087, 0.101286507323456, 0.125939180544827);
      break;
    case 6:
      add_orbit3(r, 0.501426509658179, 0.249286745170910, 0.116786275726379);
      add_orbit3(r, 0.873821971016996, 0.063089014491502, 0.050844906370207);
      add_orbit6(r, 0.053145049844816, 0.310352451033785, 0.636502499121399,
                 0.082851075618374);
      break;
    default:
      throw std::logic_error("no hardcoded symmetric rule for this degree");
  }
  return r;
}

// Conical product of Gauss-Legendre (xi) and Gauss-Jacobi (eta) through the
// Duffy map x = xi (1 - eta), y = eta. Positive weights, interior points,
// exact to the requested total degree.
QuadratureRule conical_rule(int degree) {
  const int m = (degree + 2) / 2;  // 2m-1 >= degree
  std::vector<double> xg, wg, xj, wj;
  gauss_legendre(m, xg, wg);
  gauss_jacobi10(m, xj, wj);
  QuadratureRule r;
  r.degree = degree;
  for (int i = 0; i < m; ++i) {
    const double xi = 0.5 * (xg[i] + 1.0);
    for (int j = 0; j < m; ++j) {
      const double eta = 0.5 * (xj[j] + 1.0);
      const double x = xi * (1.0 - eta);
      const double y = eta;
      r.points.push_back({1.0 - x - y, x, y});
      // |T_ref| Sum w = 1/2; normalise so the weights sum to 1.
      r.weights.push_back(2.0 * (0.5 * wg[i]) * (0.25 * wj[j]));
    }
  }
  return r;
}

}  // namespace

const QuadratureRule& triangle_rule(int degree) {
  if (degree < 1 || degree > 12) throw std::invalid_argument("quadrature degree must be in 1..12");
  static std::map<int, QuadratureRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  QuadratureRule r;
  switch (degree) {
    case 1:
    case 2:
    case 5:
    case 6:
      r = symmetric_rule(degree);
      break;
    case 3:
    case 4:
      r = symmetric_rule(4);
      r.degree = 4;
      break;
    default:
      r = conical_rule(degree);
      break;
  }
  return cache.emplace(degree, std::move(r)).first->second;
}

const EdgeRule& edge_rule(int npoints) {
  if (npoints < 1 || npoints > 30) throw std::invalid_argument("edge rule size must be in 1..30");
  static std::map<int, EdgeRule> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(npoints);
  if (it != cache.end()) return it->second;
  std::vector<double> x, w;
  gauss_legendre(npoints, x, w);
  EdgeRule r;
  for (int i = 0; i < npoints; ++i) {
    r.points.push_back(0.5 * (x[i] + 1.0));
    r.weights.push_back(0.5 * w[i]);
  }
  return cache.emplace(npoints, std::move(r)).first->second;
}

}  // namespace amstokes
