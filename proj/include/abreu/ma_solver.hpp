#pragma once

// Dirichlet Monge-Ampere solver: det D^2 u = g, u = phi on the boundary.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "abreu/discrete_ops.hpp"
#include "abreu/linalg.hpp"

namespace abreu {

struct MAConfig {
  double tolerance = 1e-9;   // on ||det D^2 u - g||_inf
  int max_iterations = 60;
  double eig_floor = 1e-6;   // Hessian eigenvalue clamp inside the linearization
  double shrink = 0.5;       // line-search factor
  int max_halvings = 20;
};

struct MAReport {
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;  // ||det - g||_inf per iterate
  std::vector<double> steps;
  double min_eigenvalue = 0.0;
  double worst_linear_residual = 0.0;
  double rounding_floor = 0.0;  // attainable residual given the stencil weights
  std::string message;
};

struct MAResult {
  ScalarField u;
  MAReport report;
};

namespace detail {

/// First-order bound on the rounding error of det D^2 u; dominated by nodes very close to the boundary.
inline double det_rounding_floor(const DiscreteDomain& dd, const ScalarField& u, const TensorField& t) {
  const Eigen::VectorXd au = u.values().cwiseAbs();
  const Eigen::VectorXd sxx = dd.ops.dxx.cwiseAbs() * au, syy = dd.ops.dyy.cwiseAbs() * au, sxy = dd.ops.dxy.cwiseAbs() * au;
  double f = 0.0;
  for (int k = 0; k < dd.n_interior; ++k) {
    const Sym2& H = t.hess[static_cast<std::size_t>(k)];
    f = std::max(f, sxx[k] * std::abs(H.yy) + syy[k] * std::abs(H.xx) + 2.0 * sxy[k] * std::abs(H.xy));
  }
  return std::numeric_limits<double>::epsilon() * f;
}

inline double ma_residual(const TensorField& t, const ScalarField& g, Eigen::VectorXd* F = nullptr) {
  const int ni = static_cast<int>(t.det.size());
  double r = 0.0;
  if (F) F->resize(ni);
  for (int k = 0; k < ni; ++k) {
    const double v = t.det[static_cast<std::size_t>(k)] - g[k];
    if (F) (*F)[k] = v;
    r = std::max(r, std::abs(v));
  }
  return r;
}

inline double min_hessian_eig(const TensorField& t) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& H : t.hess) m = std::min(m, H.min_eig());
  return m;
}

}  // namespace detail

/// Solution of Delta u = rhs with Dirichlet data.
inline ScalarField solve_poisson(const DomainPtr& dd, const Eigen::VectorXd& rhs_interior, const Eigen::VectorXd& boundary,
                                 LinearSolveInfo& info) {
  SpMat lap = dd->ops.dxx + dd->ops.dyy;
  Eigen::VectorXd v(dd->n_nodes());
  v.head(dd->n_interior) = solve_dirichlet(lap, rhs_interior, boundary, info);
  v.tail(dd->n_boundary()) = boundary;
  return {dd, std::move(v)};
}

/// Damped Newton with cofactor linearization; `initial` overrides the Poisson start.
inline MAResult solve_ma(const DomainPtr& dd, const ScalarField& g, const Sampler& phi, const MAConfig& cfg = {},
                         const std::optional<ScalarField>& initial = std::nullopt) {
  if (!(cfg.tolerance > 0.0) || !(cfg.eig_floor > 0.0)) throw DomainError("MAConfig: tolerance and eig_floor must be positive");
  for (int k = 0; k < dd->n_interior; ++k) {
    if (!(g[k] > 0.0)) throw DomainError("solve_ma: g must be positive (node " + std::to_string(k) + ")");
  }
  MAResult res;
  MAReport& rep = res.report;

  Eigen::VectorXd phib(dd->n_boundary());
  for (int b = 0; b < dd->n_boundary(); ++b) {
    const Vec2 p = dd->pos[static_cast<std::size_t>(dd->n_interior + b)];
    phib[b] = phi(p.x, p.y);
  }

  ScalarField u;
  if (initial) {
    u = *initial;
    u.values().tail(dd->n_boundary()) = phib;
  } else {
    LinearSolveInfo li;
    u = solve_poisson(dd, 2.0 * g.interior().cwiseSqrt(), phib, li);
    rep.worst_linear_residual = li.relative_residual;
  }

  TensorField t = differentiate(u);
  Eigen::VectorXd F;
  double r = detail::ma_residual(t, g, &F);
  rep.residuals.push_back(r);
  std::vector<Sym2> coef(static_cast<std::size_t>(dd->n_interior));
  const Eigen::VectorXd zero_b = Eigen::VectorXd::Zero(dd->n_boundary());

  rep.rounding_floor = detail::det_rounding_floor(*dd, u, t);
  auto done = [&] { return r <= std::max(cfg.tolerance, rep.rounding_floor); };
  for (int it = 0; it < cfg.max_iterations && !done(); ++it) {
    for (int k = 0; k < dd->n_interior; ++k) {
      coef[static_cast<std::size_t>(k)] = t.hess[static_cast<std::size_t>(k)].clamped(cfg.eig_floor).cofactor();
    }
    const SpMat J = nondivergence_operator(*dd, coef);
    LinearSolveInfo li;
    const Eigen::VectorXd du = solve_dirichlet(J, -F, zero_b, li);
    rep.worst_linear_residual = std::max(rep.worst_linear_residual, li.relative_residual);
    if (!du.allFinite()) {
      rep.message = "linear solve failed";
      break;
    }

    double step = 1.0;
    ScalarField trial = u;
    TensorField tt;
    Eigen::VectorXd Ft;
    double rt = 0.0;
    for (int hcount = 0;; ++hcount) {
      trial.values().head(dd->n_interior) = u.interior() + step * du;
      tt = differentiate(trial);
      rt = detail::ma_residual(tt, g, &Ft);
      if (rt < (1.0 - 1e-4 * step) * r || hcount >= cfg.max_halvings) break;
      step *= cfg.shrink;
    }
    if (!(rt < r)) {
      rep.message = "line search stalled";
      break;
    }
    u = std::move(trial);
    t = std::move(tt);
    F = std::move(Ft);
    r = rt;
    rep.rounding_floor = detail::det_rounding_floor(*dd, u, t);
    rep.residuals.push_back(r);
    rep.steps.push_back(step);
    rep.iterations = it + 1;
  }
  rep.converged = done();
  rep.min_eigenvalue = detail::min_hessian_eig(t);
  if (rep.converged) rep.message = "converged";
  else if (rep.message.empty()) rep.message = "iteration limit reached";
  res.u = std::move(u);
  return res;
}

}  // namespace abreu
