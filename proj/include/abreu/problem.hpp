#pragma once

#include <stdexcept>
#include <string>
#include <utility>

#include "abreu/discrete_ops.hpp"
#include "abreu/gfun.hpp"

namespace abreu {

/// Data of the second boundary value problem on a grid.
struct SBVPProblem {
  GFunction G;
  DomainPtr dd;
  ScalarField f;
  Sampler phi;
  Sampler psi;
  double p = 3.0;  // exponent for reported Lebesgue norms, p > n

  SBVPProblem(GFunction g, DomainPtr d, ScalarField rhs, Sampler boundary_u, Sampler boundary_w, double exponent = 3.0)
      : G(std::move(g)), dd(std::move(d)), f(std::move(rhs)), phi(std::move(boundary_u)), psi(std::move(boundary_w)),
        p(exponent) {
    if (f.size() != dd->n_nodes()) throw DomainError("right-hand side does not live on the problem grid");
    if (min_psi() <= 0.0) throw DomainError("boundary data for w must be positive");
  }

  ScalarField psi_field() const {
    ScalarField s = ScalarField::constant(dd, 0.0);
    s.set_boundary(psi);
    return s;
  }

  double min_psi() const {
    double m = std::numeric_limits<double>::infinity();
    for (int k = dd->n_interior; k < dd->n_nodes(); ++k) m = std::min(m, psi(dd->pos[static_cast<std::size_t>(k)].x, dd->pos[static_cast<std::size_t>(k)].y));
    return m;
  }
};

}  // namespace abreu
