#pragma once

// Convex and concave barriers phi -/+ mu (e^rho - 1) that match phi on the boundary.

#include <cmath>
#include <optional>
#include <string>

#include "abreu/discrete_ops.hpp"
#include "abreu/gfun.hpp"

namespace abreu {

struct Barrier {
  bool ok = false;
  double mu = 0.0;
  double min_eig = 0.0;  // min eigenvalue of the discrete Hessian of the convex barrier
  Sampler lower;         // convex: phi + mu (e^rho - 1)
  Sampler upper;         // concave: phi - mu (e^rho - 1)
  std::optional<ScalarField> rhs;  // U^{ij} w_ij of the convex barrier, when G is given
  double rhs_norm = 0.0;           // its L^p norm
  std::string message;
};

namespace detail {

inline Sampler shifted_barrier(const ConvexDomain& dom, Sampler phi, double mu) {
  return [dom, phi = std::move(phi), mu](double x, double y) { return phi(x, y) + mu * std::expm1(dom.rho({x, y})); };
}

/// Hessian of a sampler by centred differences with step s.
inline Sym2 sampler_hessian(const Sampler& f, Vec2 p, double s) {
  const double c = f(p.x, p.y);
  const double xx = (f(p.x + s, p.y) - 2 * c + f(p.x - s, p.y)) / (s * s);
  const double yy = (f(p.x, p.y + s) - 2 * c + f(p.x, p.y - s)) / (s * s);
  const double xy = (f(p.x + s, p.y + s) - f(p.x + s, p.y - s) - f(p.x - s, p.y + s) + f(p.x - s, p.y - s)) / (4 * s * s);
  return {xx, xy, yy};
}

}  // namespace detail

/// Doubling search for mu from 1 until the discrete Hessian of the convex barrier
/// has eigenvalues >= eps at every interior node.
inline Barrier build_barrier(const DomainPtr& dd, const Sampler& phi, double eps = 1e-3,
                             const GFunction* G = nullptr, double p = 3.0) {
  Barrier b;
  const ConvexDomain dom = dd->domain;
  for (double mu = 1.0; mu <= 1e8; mu *= 2.0) {
    const auto t = differentiate(ScalarField::sample(dd, detail::shifted_barrier(dom, phi, mu)));
    double m = std::numeric_limits<double>::infinity();
    for (const auto& H : t.hess) m = std::min(m, H.min_eig());
    if (m >= eps) {
      b.ok = true;
      b.mu = mu;
      b.min_eig = m;
      break;
    }
  }
  if (!b.ok) {
    b.message = "barrier parameter exceeded 1e8";
    return b;
  }
  b.lower = detail::shifted_barrier(dom, phi, b.mu);
  b.upper = detail::shifted_barrier(dom, phi, -b.mu);
  b.message = "ok";
  if (G) {
    const auto ut = ScalarField::sample(dd, b.lower);
    const auto t = differentiate(ut);
    ScalarField wt = ScalarField::constant(dd, 0.0);
    for (int k = 0; k < dd->n_interior; ++k) wt[k] = G->w(t.det[static_cast<std::size_t>(k)]);
    const double s = std::sqrt(dd->h) * 1e-2;
    for (int k = dd->n_interior; k < dd->n_nodes(); ++k) {
      wt[k] = G->w(detail::sampler_hessian(b.lower, dd->pos[static_cast<std::size_t>(k)], s).det());
    }
    b.rhs = apply_L(t, wt);
    b.rhs_norm = lp_norm(*b.rhs, p);
  }
  return b;
}

}  // namespace abreu
