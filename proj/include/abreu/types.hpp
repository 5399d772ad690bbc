#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

namespace abreu {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
  friend double norm(Vec2 a) { return std::hypot(a.x, a.y); }
};

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static Sym2 identity() { return {1.0, 0.0, 1.0}; }

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }

  /// Cofactor matrix; for 2x2 this is [[yy, -xy], [-xy, xx]] = det * inverse.
  Sym2 cofactor() const { return {yy, -xy, xx}; }

  Sym2 inverse() const {
    const double d = det();
    return {yy / d, -xy / d, xx / d};
  }

  double min_eig() const {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return m - r;
  }
  double max_eig() const {
    const double m = 0.5 * (xx + yy);
    const double r = std::hypot(0.5 * (xx - yy), xy);
    return m + r;
  }

  /// Same eigenvectors, eigenvalues clamped from below at `floor`.
  Sym2 clamped(double floor) const {
    const double m = 0.5 * (xx + yy);
    const double hd = 0.5 * (xx - yy);
    const double r = std::hypot(hd, xy);
    const double l1 = std::max(m + r, floor);
    const double l2 = std::max(m - r, floor);
    if (r == 0.0) return {l1, 0.0, l1};
    // unit eigenvector of the larger eigenvalue
    const double c2 = hd / r;  // cos(2a)
    const double s2 = xy / r;  // sin(2a)
    const double cc = 0.5 * (1.0 + c2);
    const double ss = 0.5 * (1.0 - c2);
    const double cs = 0.5 * s2;
    return {l1 * cc + l2 * ss, (l1 - l2) * cs, l1 * ss + l2 * cc};
  }

  /// Frobenius contraction A:B.
  double contract(const Sym2& o) const { return xx * o.xx + 2.0 * xy * o.xy + yy * o.yy; }

  double quad(Vec2 v) const { return xx * v.x * v.x + 2.0 * xy * v.x * v.y + yy * v.y * v.y; }
  Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

  friend Sym2 operator-(const Sym2& a, const Sym2& b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
  friend Sym2 operator+(const Sym2& a, const Sym2& b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
  friend Sym2 operator*(double s, const Sym2& a) { return {s * a.xx, s * a.xy, s * a.yy}; }
};

/// Pointwise scalar function of the plane, used for boundary data and closed-form fields.
using Sampler = std::function<double(double x, double y)>;

inline constexpr double kPi = 3.14159265358979323846;

/// Volume of the unit ball in R^n.
inline double unit_ball_volume(int n) {
  return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

}  // namespace abreu
