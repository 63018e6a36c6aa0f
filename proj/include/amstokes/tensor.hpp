#pragma once

#include <cmath>

namespace amstokes {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// 2x2 tensor. Specialised to d=2 throughout the library.
struct Tensor2 {
  double t11 = 0.0, t12 = 0.0;
  double t21 = 0.0, t22 = 0.0;

  static Tensor2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Tensor2 outer(const Vec2& a, const Vec2& b) {
    return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y};
  }

  Tensor2 operator+(const Tensor2& o) const {
    return {t11 + o.t11, t12 + o.t12, t21 + o.t21, t22 + o.t22};
  }
  Tensor2 operator-(const Tensor2& o) const {
    return {t11 - o.t11, t12 - o.t12, t21 - o.t21, t22 - o.t22};
  }
  Tensor2 operator*(double s) const { return {t11 * s, t12 * s, t21 * s, t22 * s}; }
  Tensor2& operator+=(const Tensor2& o) {
    t11 += o.t11;
    t12 += o.t12;
    t21 += o.t21;
    t22 += o.t22;
    return *this;
  }

  Tensor2 transpose() const { return {t11, t21, t12, t22}; }
  double trace() const { return t11 + t22; }

  /// Row-wise application to a vector from the right: (t * n)_i = row_i . n.
  Vec2 operator*(const Vec2& n) const {
    return {t11 * n.x + t12 * n.y, t21 * n.x + t22 * n.y};
  }

  Vec2 row(int r) const { return r == 0 ? Vec2{t11, t12} : Vec2{t21, t22}; }

  double frobenius_norm() const {
    return std::sqrt(t11 * t11 + t12 * t12 + t21 * t21 + t22 * t22);
  }
};

inline Tensor2 operator*(double s, const Tensor2& t) { return t * s; }

/// Frobenius pairing sigma : tau.
inline double ddot(const Tensor2& a, const Tensor2& b) {
  return a.t11 * b.t11 + a.t12 * b.t12 + a.t21 * b.t21 + a.t22 * b.t22;
}

/// Trace-free part: t - (tr t / 2) I. Not invertible; kills the pressure
/// component of a stress tensor.
inline Tensor2 dev(const Tensor2& t) {
  const double m = 0.5 * t.trace();
  return {t.t11 - m, t.t12, t.t21, t.t22 - m};
}

inline Tensor2 sym_part(const Tensor2& g) {
  const double off = 0.5 * (g.t12 + g.t21);
  return {g.t11, off, off, g.t22};
}

inline Tensor2 skew_part(const Tensor2& g) {
  const double off = 0.5 * (g.t12 - g.t21);
  return {0.0, off, -off, 0.0};
}

}  // namespace amstokes
