#pragma once

// Singular radial solutions u = r^alpha of U^{ij} w_ij = f with w = (det D^2 u)^{theta - 1}.

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "abreu/errors.hpp"

namespace abreu {

enum class RadialCase { i, ii, iii, custom };

inline const char* to_string(RadialCase c) {
  switch (c) {
    case RadialCase::i: return "i";
    case RadialCase::ii: return "ii";
    case RadialCase::iii: return "iii";
    case RadialCase::custom: return "custom";
  }
  return "?";
}

inline constexpr double kRadialFloor = 1e-6;

class RadialSolution {
 public:
  /// Power-law family with explicit exponents.
  static RadialSolution custom(int n, double theta, double alpha) {
    return RadialSolution(RadialCase::custom, n, theta, alpha);
  }

  int n() const { return n_; }
  double theta() const { return theta_; }
  double alpha() const { return alpha_; }
  RadialCase tag() const { return tag_; }
  double C1() const { return c1_; }
  double C2() const { return c2_; }
  double C2_check_error() const { return c2_check_; }

  /// (alpha - 2)(n theta - 1) + n - 2, the exponent of W'(v')^{n-1}.
  double flux_exponent() const { return (alpha_ - 2) * (n_ * theta_ - 1) + n_ - 2; }
  /// (alpha - 2)(n theta - 1) - 2, the exponent of f.
  double f_exponent() const { return (alpha_ - 2) * (n_ * theta_ - 1) - 2; }
  /// (alpha - 2) n (theta - 1), the exponent of W.
  double w_exponent() const { return (alpha_ - 2) * n_ * (theta_ - 1); }

  double v(double r) const { return std::pow(guard(r), alpha_); }
  double dv(double r) const { return alpha_ * std::pow(guard(r), alpha_ - 1); }
  double d2v(double r) const { return alpha_ * (alpha_ - 1) * std::pow(guard(r), alpha_ - 2); }
  double d4v(double r) const {
    return alpha_ * (alpha_ - 1) * (alpha_ - 2) * (alpha_ - 3) * std::pow(guard(r), alpha_ - 4);
  }
  double det(double r) const { return d2v(r) * std::pow(dv(r) / guard(r), n_ - 1); }
  double W(double r) const { return std::pow(det(r), theta_ - 1); }
  double dW(double r) const { return w_scale() * w_exponent() * std::pow(guard(r), w_exponent() - 1); }
  double f(double r) const { return c2_ * std::pow(guard(r), f_exponent()); }

  /// W'(v')^{n-1}.
  double flux(double r) const { return dW(r) * std::pow(dv(r), n_ - 1); }

  /// v and W in an arbitrary floating type, for refinement studies below double rounding.
  template <class T>
  T v_as(const T& r) const {
    using std::pow;
    return pow(r < T(kRadialFloor) ? T(kRadialFloor) : r, T(alpha_));
  }
  template <class T>
  T W_as(const T& r) const {
    using std::pow;
    const T a(alpha_), rr = r < T(kRadialFloor) ? T(kRadialFloor) : r;
    return pow(pow(a, n_) * (a - 1), T(theta_) - 1) * pow(rr, T(w_exponent()));
  }

  double u(double x, double y) const { return v(std::hypot(x, y)); }
  double w(double x, double y) const { return W(std::hypot(x, y)); }
  double rhs(double x, double y) const { return f(std::hypot(x, y)); }

 private:
  friend RadialSolution make_case(RadialCase c, int n, double parameter);

  RadialSolution(RadialCase tag, int n, double theta, double alpha) : tag_(tag), n_(n), theta_(theta), alpha_(alpha) {
    if (n < 2) throw DomainError("radial family needs n >= 2");
    if (!(alpha > 1.0 && alpha < 2.0)) throw DomainError("radial family needs 1 < alpha < 2, got " + std::to_string(alpha));
    if (!(theta < 1.0)) throw DomainError("radial family needs theta < 1");
    // C1 from the flux at r = 1/2, C2 from its numerical derivative there, checked at r = 4/5
    const double r0 = 0.5;
    c1_ = flux(r0) / std::pow(r0, flux_exponent());
    c2_ = differentiated_quotient(r0) / std::pow(r0, f_exponent());
    const double r1 = 0.8;
    const double q1 = differentiated_quotient(r1);
    c2_check_ = std::abs(q1 - c2_ * std::pow(r1, f_exponent())) / std::abs(q1);
  }

  static double guard(double r) { return std::max(r, kRadialFloor); }
  double w_scale() const { return std::pow(std::pow(alpha_, n_) * (alpha_ - 1), theta_ - 1); }

  /// [W'(v')^{n-1}]' / r^{n-1} by a fourth-order centred difference of the flux.
  double differentiated_quotient(double r) const {
    const double s = 1e-3 * r;
    const double d = (-flux(r + 2 * s) + 8 * flux(r + s) - 8 * flux(r - s) + flux(r - 2 * s)) / (12 * s);
    return d / std::pow(r, n_ - 1);
  }

  RadialCase tag_;
  int n_;
  double theta_, alpha_;
  double c1_ = 0.0, c2_ = 0.0, c2_check_ = 0.0;
};

/// Cases of the radial family. The parameter is p for case i and theta otherwise.
inline RadialSolution make_case(RadialCase c, int n, double parameter) {
  if (n < 2) throw DomainError("radial family needs n >= 2");
  const double nd = n;
  switch (c) {
    case RadialCase::i: {
      const double p = parameter;
      if (!(p > nd / 2 && p < nd)) throw DomainError("case i needs n/2 < p < n");
      const double alpha = 1.0 + (nd - p) / (2.0 * (3.0 * p - nd));
      const double theta = (nd / p - 1.0) / (2.0 * nd);
      return RadialSolution(c, n, theta, alpha);
    }
    case RadialCase::ii: {
      const double theta = parameter;
      if (!(theta < -1.0 / nd)) throw DomainError("case ii needs theta < -1/n");
      return RadialSolution(c, n, theta, 2.0 * nd * theta / (nd * theta - 1.0));
    }
    case RadialCase::iii: {
      const double theta = parameter;
      if (!(theta >= -1.0 / nd && theta < 0.0)) throw DomainError("case iii needs -1/n <= theta < 0");
      return RadialSolution(c, n, theta, (4.0 - 5.0 * nd * theta) / (4.0 * (1.0 - nd * theta)));
    }
    case RadialCase::custom: break;
  }
  throw DomainError("make_case: use RadialSolution::custom for explicit exponents");
}

template <class T>
struct BasicRadialOperatorResult {
  std::vector<T> r;    // evaluation points
  std::vector<T> f;    // [W'(v')^{n-1}]' / r^{n-1}
  std::vector<T> det;  // v'' (v'/r)^{n-1}
};
using RadialOperatorResult = BasicRadialOperatorResult<double>;

/// Discrete radial operator on a uniform grid: midpoint fluxes for f, fourth-order
/// centred differences for det. Results cover the points with two neighbours each side.
template <class T>
BasicRadialOperatorResult<T> radial_operator(std::span<const T> v, std::span<const T> W, int n, std::span<const T> r) {
  using std::pow;
  const std::size_t N = r.size();
  if (v.size() != N || W.size() != N || N < 5) throw DomainError("radial_operator: need at least 5 matching samples");
  for (const T& x : r) {
    if (!(x > 0)) throw DomainError("radial_operator: radii must be positive");
  }
  const T dr = (r[N - 1] - r[0]) / static_cast<double>(N - 1);
  std::vector<T> q(N - 1);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    q[i] = (W[i + 1] - W[i]) / dr * pow((v[i + 1] - v[i]) / dr, n - 1);
  }
  BasicRadialOperatorResult<T> out;
  for (std::size_t i = 2; i + 2 < N; ++i) {
    out.r.push_back(r[i]);
    out.f.push_back((q[i] - q[i - 1]) / (dr * pow(r[i], n - 1)));
    const T d1 = (-v[i + 2] + 8 * v[i + 1] - 8 * v[i - 1] + v[i - 2]) / (12 * dr);
    const T d2 = (-v[i + 2] + 16 * v[i + 1] - 30 * v[i] + 16 * v[i - 1] - v[i - 2]) / (12 * dr * dr);
    out.det.push_back(d2 * pow(d1 / r[i], n - 1));
  }
  return out;
}

inline RadialOperatorResult radial_operator(std::span<const double> v, std::span<const double> W, int n,
                                            std::span<const double> r) {
  return radial_operator<double>(v, W, n, r);
}

/// Samples of sol on n uniform points of [a, b] fed through the radial operator.
template <class T = double>
BasicRadialOperatorResult<T> sample_radial_operator(const RadialSolution& sol, double a, double b, std::size_t points) {
  std::vector<T> r(points), v(points), W(points);
  const T lo(a), hi(b);
  for (std::size_t i = 0; i < points; ++i) {
    r[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    v[i] = sol.v_as(r[i]);
    W[i] = sol.W_as(r[i]);
  }
  return radial_operator<T>(std::span<const T>(v), std::span<const T>(W), sol.n(), std::span<const T>(r));
}

/// (max f - min f) / |mean f|.
template <class T>
T relative_spread(const std::vector<T>& f) {
  using std::abs;
  T lo = f.front(), hi = f.front(), sum = 0;
  for (const T& x : f) {
    if (x < lo) lo = x;
    if (x > hi) hi = x;
    sum += x;
  }
  return (hi - lo) / abs(sum / static_cast<double>(f.size()));
}

struct BlowupProfile {
  std::vector<double> eps;
  std::vector<double> mass;        // int_{eps < r < 1} |v''''|^p r^{n-1} dr
  double slope = 0.0;              // least-squares slope of log mass against log eps
  double shell_slope = 0.0;        // same for the shell increments between consecutive eps
  double integrand_exponent = 0.0; // p (alpha - 4) + n - 1
  bool divergent = false;          // integrand exponent <= -1
};

/// Mass of the analytic fourth derivative outside r = eps, by composite Gauss-Legendre in log r.
inline BlowupProfile blowup_profile(const RadialSolution& sol, double p, std::span<const double> eps) {
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (eps[i] < 1e-6) throw DomainError("blowup_profile: eps must be >= 1e-6");
    if (i > 0 && !(eps[i] < eps[i - 1])) throw DomainError("blowup_profile: eps must decrease");
  }
  static constexpr std::array<double, 5> gx = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                               0.9061798459386640};
  static constexpr std::array<double, 5> gw = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                               0.4786286704993665, 0.2369268850561891};
  const int n = sol.n();
  auto mass_between = [&](double a, double b) {
    const double la = std::log(a), lb = std::log(b);
    const int panels = std::max(8, static_cast<int>(16 * (lb - la)));
    double s = 0.0;
    for (int k = 0; k < panels; ++k) {
      const double lo = la + (lb - la) * k / panels, hi = la + (lb - la) * (k + 1) / panels;
      for (std::size_t j = 0; j < gx.size(); ++j) {
        const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx[j];
        const double r = std::exp(t);
        s += 0.5 * (hi - lo) * gw[j] * std::pow(std::abs(sol.d4v(r)), p) * std::pow(r, n - 1) * r;
      }
    }
    return s;
  };
  BlowupProfile out;
  out.eps.assign(eps.begin(), eps.end());
  out.integrand_exponent = p * (sol.alpha() - 4) + n - 1;
  out.divergent = out.integrand_exponent <= -1.0;
  std::vector<double> shell;
  double prev = 1.0, acc = 0.0;
  for (double e : eps) {
    const double m = mass_between(e, prev);
    shell.push_back(m);
    acc += m;
    out.mass.push_back(acc);
    prev = e;
  }
  auto fit = [](std::span<const double> x, std::span<const double> y) {
    const double m = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double a = std::log(x[i]), b = std::log(y[i]);
      sx += a;
      sy += b;
      sxx += a * a;
      sxy += a * b;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
  };
  if (eps.size() >= 2) {
    out.slope = fit(out.eps, out.mass);
    // shells need a geometric sequence to share a width; fit over the shells past the first
    if (eps.size() >= 3) {
      out.shell_slope = fit(std::span<const double>(out.eps).subspan(1), std::span<const double>(shell).subspan(1));
    }
  }
  return out;
}

}  // namespace abreu
