#pragma once

// Fixed-point iteration for the coupled system
//   U^{ij} w_ij = f,  w = G'(det D^2 u),  u = phi and w = psi on the boundary.

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "abreu/diagnostics.hpp"
#include "abreu/lma_solver.hpp"
#include "abreu/ma_solver.hpp"
#include "abreu/problem.hpp"

namespace abreu {

enum class SolveStatus { converged, positivity_breakdown, not_converged, ma_failure, ellipticity_failure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::positivity_breakdown: return "positivity_breakdown";
    case SolveStatus::not_converged: return "not_converged";
    case SolveStatus::ma_failure: return "ma_failure";
    case SolveStatus::ellipticity_failure: return "ellipticity_failure";
  }
  return "?";
}

struct SBVPOptions {
  double tol = 1e-6;
  int max_outer = 200;
  double damping = 0.5;
  bool continuation = true;
  int max_continuation_steps = 40;
  double clamp_floor = 1e-10;
  MAConfig ma;
  std::optional<ScalarField> initial_u;
  std::optional<ScalarField> initial_w;
  bool fill_ledger = true;
};

struct Residuals {
  double r1 = 0.0;  // ||U^{ij} w_ij - f||_inf over nodes at distance >= 2h
  double r2 = 0.0;  // ||w - G'(det D^2 u)||_inf over interior nodes
  int bad_node = -1;  // node with det <= 0, if any
};

struct SolveReport {
  SolveStatus status = SolveStatus::not_converged;
  int outer_iterations = 0;
  std::vector<double> r1, r2;
  double damping = 0.5;
  std::vector<double> continuation;  // accepted homotopy parameters
  bool clamped = false;
  int breakdown_node = -1;
  int ma_iterations = 0;
  double worst_linear_residual = 0.0;
  std::string message;
  std::optional<BoundLedger> ledger;

  bool converged() const { return status == SolveStatus::converged; }
};

struct SBVPResult {
  ScalarField u;
  ScalarField w;
  SolveReport report;
};

inline Residuals residuals(const ScalarField& u, const ScalarField& w, const ScalarField& f, const GFunction& G) {
  const auto& dd = u.domain();
  const auto t = differentiate(u);
  const auto Lw = apply_L(t, w);
  Residuals r;
  for (int k = 0; k < dd.n_interior; ++k) {
    if (dd.dist[static_cast<std::size_t>(k)] >= 2.0 * dd.h) r.r1 = std::max(r.r1, std::abs(Lw[k] - f[k]));
    const double d = t.det[static_cast<std::size_t>(k)];
    if (!(d > 0.0)) {
      r.r2 = std::numeric_limits<double>::infinity();
      if (r.bad_node < 0) r.bad_node = k;
      continue;
    }
    r.r2 = std::max(r.r2, std::abs(w[k] - G.w(d)));
  }
  return r;
}

inline Residuals residuals(const ScalarField& u, const ScalarField& w, const SBVPProblem& prob) {
  return residuals(u, w, prob.f, prob.G);
}

namespace detail {

struct SweepState {
  ScalarField u, w;
};

/// Harmonic function with boundary values psi.
inline ScalarField harmonic_extension(const SBVPProblem& prob) {
  const auto& dd = prob.dd;
  LinearSolveInfo li;
  const ScalarField psi = prob.psi_field();
  return solve_poisson(dd, Eigen::VectorXd::Zero(dd->n_interior), psi.boundary(), li);
}

/// Run the damped iteration for right side `f` from `state`; returns the status.
inline SolveStatus iterate(const SBVPProblem& prob, const ScalarField& f, const SBVPOptions& opt, SweepState& state,
                           SolveReport& rep, int max_outer, bool stop_on_divergence) {
  const auto& dd = prob.dd;
  const ScalarField psi = prob.psi_field();
  const auto [wlo, whi] = prob.G.w_range();
  const double fscale = 1.0 + max_abs_interior(f);
  const double target = opt.tol * fscale;
  double best = std::numeric_limits<double>::infinity();
  int rising = 0;

  ScalarField g = ScalarField::constant(dd, 1.0);
  for (int it = 0; it < max_outer; ++it) {
    for (int k = 0; k < dd->n_interior; ++k) {
      double s = state.w[k];
      const double lo = std::max(opt.clamp_floor, wlo), hi = whi;
      if (s < lo || s > hi) {
        rep.clamped = true;
        s = std::clamp(s, lo, hi);
      }
      g[k] = prob.G.invert_w(s);
    }
    auto ma = solve_ma(dd, g, prob.phi, opt.ma, std::optional<ScalarField>(state.u));
    rep.ma_iterations += ma.report.iterations;
    rep.worst_linear_residual = std::max(rep.worst_linear_residual, ma.report.worst_linear_residual);
    if (!ma.report.converged) {
      rep.message = "Monge-Ampere solve failed: " + ma.report.message;
      state.u = std::move(ma.u);
      return SolveStatus::ma_failure;
    }
    state.u = std::move(ma.u);

    const Residuals r = residuals(state.u, state.w, f, prob.G);
    rep.r1.push_back(r.r1);
    rep.r2.push_back(r.r2);
    ++rep.outer_iterations;
    if (std::max(r.r1, r.r2) <= target) return SolveStatus::converged;

    const double m = std::max(r.r1, r.r2);
    if (stop_on_divergence) {
      rising = m > best ? rising + 1 : 0;
      best = std::min(best, m);
      if (rising >= 5 || !std::isfinite(m) || m > 1e6 * fscale) {
        rep.message = "iteration diverging";
        return SolveStatus::not_converged;
      }
    }

    const auto U = differentiate(state.u);
    LMAResult lma;
    try {
      lma = solve_lma(dd, U, f, psi);
    } catch (const EllipticityError& e) {
      rep.message = e.what();
      return SolveStatus::ellipticity_failure;
    }
    rep.worst_linear_residual = std::max(rep.worst_linear_residual, lma.report.linear_residual);
    state.w.values() = (1.0 - opt.damping) * state.w.values() + opt.damping * lma.w.values();
    for (int k = 0; k < dd->n_interior; ++k) {
      if (!(state.w[k] > 0.0)) {
        rep.breakdown_node = k;
        const Vec2 p = dd->pos[static_cast<std::size_t>(k)];
        rep.message = "w <= 0 at node " + std::to_string(k) + " (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
        return SolveStatus::positivity_breakdown;
      }
    }
  }
  rep.message = "outer iteration limit reached";
  return SolveStatus::not_converged;
}

}  // namespace detail

/// Solve the second boundary value problem; continuation in t f engages when the direct iteration diverges.
inline SBVPResult solve_sbvp(const SBVPProblem& prob, const SBVPOptions& opt = {}) {
  if (!(opt.damping > 0.0 && opt.damping <= 1.0)) throw DomainError("damping must lie in (0, 1]");
  const auto& dd = prob.dd;
  SolveReport rep;
  rep.damping = opt.damping;

  detail::SweepState init;
  init.w = opt.initial_w ? *opt.initial_w : detail::harmonic_extension(prob);
  init.w.set_boundary(prob.psi);
  if (opt.initial_u) {
    init.u = *opt.initial_u;
  } else {
    // Poisson start for the first Monge-Ampere solve
    ScalarField g = ScalarField::constant(dd, 1.0);
    for (int k = 0; k < dd->n_interior; ++k) g[k] = prob.G.invert_w(std::clamp(init.w[k], std::max(opt.clamp_floor, prob.G.w_range().first), prob.G.w_range().second));
    Eigen::VectorXd phib(dd->n_boundary());
    for (int b = 0; b < dd->n_boundary(); ++b) {
      const Vec2 p = dd->pos[static_cast<std::size_t>(dd->n_interior + b)];
      phib[b] = prob.phi(p.x, p.y);
    }
    LinearSolveInfo li;
    init.u = solve_poisson(dd, 2.0 * g.interior().cwiseSqrt(), phib, li);
  }

  detail::SweepState state = init;
  SolveStatus st = detail::iterate(prob, prob.f, opt, state, rep, opt.max_outer, opt.continuation);

  if (st == SolveStatus::not_converged && opt.continuation) {
    rep.message = "direct iteration diverged; continuation engaged";
    state = init;
    double t = 0.0, dt = 0.25;
    int steps = 0;
    st = SolveStatus::not_converged;
    while (steps < opt.max_continuation_steps && dt > 1e-3) {
      const double tn = std::min(1.0, t + dt);
      detail::SweepState trial = state;
      const ScalarField ft = tn * prob.f;
      const SolveStatus s = detail::iterate(prob, ft, opt, trial, rep, opt.max_outer, true);
      ++steps;
      if (s == SolveStatus::converged) {
        state = std::move(trial);
        t = tn;
        rep.continuation.push_back(t);
        if (t >= 1.0) {
          st = SolveStatus::converged;
          break;
        }
        dt *= 1.5;
      } else if (s == SolveStatus::positivity_breakdown) {
        st = s;
        state = std::move(trial);
        break;
      } else {
        dt *= 0.5;
      }
    }
    if (st != SolveStatus::converged && st != SolveStatus::positivity_breakdown) {
      rep.message = "continuation stalled at t = " + std::to_string(t);
    }
  }
  rep.status = st;
  if (st == SolveStatus::converged) rep.message = "converged";

  SBVPResult res{std::move(state.u), std::move(state.w), std::move(rep)};
  if (opt.fill_ledger && res.report.status != SolveStatus::ma_failure) {
    try {
      res.report.ledger = bound_report(res.u, res.w, prob.f, prob);
    } catch (const std::exception&) {
      res.report.ledger.reset();
    }
  }
  return res;
}

}  // namespace abreu
