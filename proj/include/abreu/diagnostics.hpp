#pragma once

// Runtime monitors for the a priori estimate structure of the second boundary value problem.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "abreu/barrier.hpp"
#include "abreu/discrete_ops.hpp"
#include "abreu/gfun.hpp"
#include "abreu/problem.hpp"

namespace abreu {

struct EstimateCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs for upper bounds, lhs - rhs for lower bounds
  bool holds = false;
};

struct TraceRow {
  int node = -1;
  Vec2 x;
  double u_nu = 0.0;
  double barrier_nu = 0.0;
  double U_nunu = 0.0;
  double K_unu = 0.0;     // K (u_nu)^{n-1}
  double E = 0.0;         // U_nunu - K (u_nu)^{n-1}
  double phi_ss = 0.0;    // second arclength derivative of the boundary data
  double identity_residual = 0.0;  // |U^{ij}(u - v)_j nu_i - U_nunu (u - v)_nu|
};

struct BoundLedger {
  double integral_det = 0.0;
  double sup_abs_u = 0.0;
  double min_det = 0.0, max_det = 0.0;
  double min_w = 0.0, max_w = 0.0;
  double sup_grad = 0.0;
  bool grad_sup_on_boundary = false;
  double abp_constant = 0.0;  // diam / (n omega_n^{1/n})
  double tolerance = 0.0;
  EstimateCheck abp_upper;    // sup w <= sup psi + C ||f / d^{(n-1)/n}||_{L^n}
  EstimateCheck abp_lower;    // min w >= min psi - C ||f^+ / (det U)^{1/n}||_{L^n}
  EstimateCheck abp_dual;     // sup w* <= sup_bdry w* + C* ||f||_{L^n}, reported only
  EstimateCheck aleksandrov;  // sup|u| <= sup|phi| + 2 diam (int det)^{1/n}
  double J = 0.0;
  std::vector<TraceRow> traces;

  bool estimates_hold() const { return abp_upper.holds && abp_lower.holds && aleksandrov.holds; }
};

/// J[u] = int G(det D^2 u) - int u f.
inline double functional_J(const ScalarField& u, const ScalarField& f, const GFunction& G) {
  const auto& dd = u.domain();
  const auto t = differentiate(u);
  double s = 0.0;
  for (int k = 0; k < dd.n_interior; ++k) {
    const double d = t.det[static_cast<std::size_t>(k)];
    if (!(d > 0.0)) throw DomainError("functional_J: det D^2 u <= 0 at node " + std::to_string(k));
    s += dd.weight[static_cast<std::size_t>(k)] * (G.G(d) - u[k] * f[k]);
  }
  return s;
}

/// G'(det B) cof(B):(A - B) - [G(det A) - G(det B)].
inline double concavity_gap(const Sym2& A, const Sym2& B, const GFunction& G) {
  if (!(A.min_eig() > 0.0) || !(B.min_eig() > 0.0)) throw DomainError("concavity_gap: matrices must be positive definite");
  const double dA = A.det(), dB = B.det();
  return G.w(dB) * B.cofactor().contract(A - B) - (G.G(dA) - G.G(dB));
}

/// Normal traces at every boundary node from least-squares jets.
inline std::vector<TraceRow> boundary_traces(const ScalarField& u, const Sampler& phi, const Barrier* barrier = nullptr) {
  const auto& dd = u.domain();
  const auto jets = boundary_jets(u);
  std::vector<TraceRow> rows;
  rows.reserve(jets.size());
  const double s = 1e-4;
  for (int b = 0; b < dd.n_boundary(); ++b) {
    const int k = dd.n_interior + b;
    const Vec2 x = dd.pos[static_cast<std::size_t>(k)];
    const Vec2 nu = dd.normal[static_cast<std::size_t>(b)];
    const Vec2 tau = {-nu.y, nu.x};
    const Jet& J = jets[static_cast<std::size_t>(b)];
    TraceRow r;
    r.node = k;
    r.x = x;
    r.u_nu = dot(J.grad, nu);
    r.U_nunu = J.hess.quad(tau);
    r.K_unu = dd.curvature[static_cast<std::size_t>(b)] * r.u_nu;
    r.E = r.U_nunu - r.K_unu;
    // second derivative of phi along the boundary parametrized by arclength
    const double t0 = dd.param[static_cast<std::size_t>(b)];
    const auto& dom = dd.domain;
    const double speed = std::hypot(dom.a() * std::sin(t0), dom.b() * std::cos(t0));
    auto along = [&](double t) {
      const Vec2 q = dom.boundary_point(t);
      return phi(q.x, q.y);
    };
    const double dtheta = s;
    const double f1 = (along(t0 + dtheta) - along(t0 - dtheta)) / (2 * dtheta);
    const double f2 = (along(t0 + dtheta) - 2 * along(t0) + along(t0 - dtheta)) / (dtheta * dtheta);
    const double sp = (dom.a() * dom.a() - dom.b() * dom.b()) * std::sin(t0) * std::cos(t0) / speed;  // d speed / d theta
    r.phi_ss = (f2 - f1 * sp / speed) / (speed * speed);
    if (barrier && barrier->ok) {
      const double e = 1e-6;
      const Vec2 gv = {(barrier->lower(x.x + e, x.y) - barrier->lower(x.x - e, x.y)) / (2 * e),
                       (barrier->lower(x.x, x.y + e) - barrier->lower(x.x, x.y - e)) / (2 * e)};
      r.barrier_nu = dot(gv, nu);
      const Sym2 U = J.hess.cofactor();
      r.identity_residual = std::abs(dot(U.apply(J.grad - gv), nu) - U.quad(nu) * (r.u_nu - r.barrier_nu));
    }
    rows.push_back(r);
  }
  return rows;
}

struct BarrierCheck {
  enum class Outcome { pass, fail, inconclusive } outcome = Outcome::inconclusive;
  double mu = 0.0;
  int worst_node = -1;
  double worst_gap = 0.0;  // min over the band of u - v
  double tolerance = 0.0;
  int band_nodes = 0;
};

inline const char* to_string(BarrierCheck::Outcome o) {
  switch (o) {
    case BarrierCheck::Outcome::pass: return "pass";
    case BarrierCheck::Outcome::fail: return "fail";
    case BarrierCheck::Outcome::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Lower barrier phi + mu (e^rho - 1) on the band {dist <= delta}; mu doubles until
/// det D^2 v >= det D^2 u on the band interior and v <= u on its inner edge.
inline BarrierCheck barrier_check(const ScalarField& u, const Sampler& phi, double delta) {
  const auto& dd = u.domain();
  if (delta < 2.0 * dd.h) throw ResolutionError("barrier_check needs delta >= 2h");
  BarrierCheck out;
  std::vector<char> band(static_cast<std::size_t>(dd.n_nodes()), 1);
  for (int k = 0; k < dd.n_interior; ++k) band[static_cast<std::size_t>(k)] = dd.dist[static_cast<std::size_t>(k)] <= delta;
  std::vector<int> edge, core;
  for (int k = 0; k < dd.n_interior; ++k) {
    if (!band[static_cast<std::size_t>(k)]) continue;
    ++out.band_nodes;
    bool on_edge = false, inside = true;
    for (const auto& e : dd.nbr[static_cast<std::size_t>(k)]) {
      if (!band[static_cast<std::size_t>(e.node)]) on_edge = true;
      if (!dd.is_interior(e.node)) inside = false;
    }
    if (on_edge) edge.push_back(k);
    else if (inside) core.push_back(k);
  }
  const auto tu = differentiate(u);
  double umax = u.values().cwiseAbs().maxCoeff();
  out.tolerance = dd.h * dd.h * (1.0 + umax);
  std::optional<ScalarField> v;
  for (double mu = 1.0; mu <= 1e8; mu *= 2.0) {
    auto vs = ScalarField::sample(u.domain_ptr(), detail::shifted_barrier(dd.domain, phi, mu));
    const auto tv = differentiate(vs);
    bool ok = true;
    for (int k : core) {
      if (tv.det[static_cast<std::size_t>(k)] < tu.det[static_cast<std::size_t>(k)] ||
          tv.hess[static_cast<std::size_t>(k)].min_eig() <= 0.0) {
        ok = false;
        break;
      }
    }
    for (std::size_t i = 0; ok && i < edge.size(); ++i) ok = vs[edge[i]] <= u[edge[i]];
    if (ok) {
      out.mu = mu;
      v = std::move(vs);
      break;
    }
  }
  if (!v) return out;
  out.worst_gap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < dd.n_interior; ++k) {
    if (!band[static_cast<std::size_t>(k)]) continue;
    const double gap = u[k] - (*v)[k];
    if (gap < out.worst_gap) {
      out.worst_gap = gap;
      out.worst_node = k;
    }
  }
  out.outcome = out.worst_gap >= -out.tolerance ? BarrierCheck::Outcome::pass : BarrierCheck::Outcome::fail;
  return out;
}

/// Fill the ledger for a computed pair (u, w).
inline BoundLedger bound_report(const ScalarField& u, const ScalarField& w, const ScalarField& f, const SBVPProblem& prob) {
  const auto& dd = u.domain();
  const int n = 2;
  BoundLedger L;
  const auto t = differentiate(u);
  const double diam = dd.domain.diameter();
  L.abp_constant = diam / (n * std::pow(unit_ball_volume(n), 1.0 / n));

  L.min_det = std::numeric_limits<double>::infinity();
  L.max_det = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < dd.n_interior; ++k) {
    const double d = t.det[static_cast<std::size_t>(k)];
    L.integral_det += dd.weight[static_cast<std::size_t>(k)] * d;
    L.min_det = std::min(L.min_det, d);
    L.max_det = std::max(L.max_det, d);
  }
  L.sup_abs_u = u.values().cwiseAbs().maxCoeff();
  L.min_w = w.values().minCoeff();
  L.max_w = w.values().maxCoeff();

  const auto grads = node_gradients(u, t);
  double sup_in = 0.0, sup_bd = 0.0;
  for (int k = 0; k < dd.n_nodes(); ++k) {
    const double g = norm(grads[static_cast<std::size_t>(k)]);
    (dd.is_interior(k) ? sup_in : sup_bd) = std::max(dd.is_interior(k) ? sup_in : sup_bd, g);
  }
  L.sup_grad = std::max(sup_in, sup_bd);
  L.grad_sup_on_boundary = sup_bd >= sup_in - 5.0 * dd.h * (1.0 + sup_bd);

  double sup_psi = -std::numeric_limits<double>::infinity(), min_psi = std::numeric_limits<double>::infinity();
  double sup_phi = 0.0;
  for (int k = dd.n_interior; k < dd.n_nodes(); ++k) {
    const Vec2 p = dd.pos[static_cast<std::size_t>(k)];
    const double ps = prob.psi(p.x, p.y);
    sup_psi = std::max(sup_psi, ps);
    min_psi = std::min(min_psi, ps);
    sup_phi = std::max(sup_phi, std::abs(prob.phi(p.x, p.y)));
  }
  L.tolerance = 5.0 * dd.h * (1.0 + std::max(std::abs(sup_psi), L.max_w));

  // weighted L^n norms of f, f^+ and plain ||f||_{L^n}
  double nf = 0.0, nfp = 0.0, nplain = 0.0;
  bool degenerate = false;
  for (int k = 0; k < dd.n_interior; ++k) {
    const double d = t.det[static_cast<std::size_t>(k)];
    const double wt = dd.weight[static_cast<std::size_t>(k)];
    if (!(d > 0.0)) {
      degenerate = true;
      continue;
    }
    const double fk = f[k];
    nf += wt * std::pow(std::abs(fk), n) / std::pow(d, n - 1);
    nfp += wt * std::pow(std::max(fk, 0.0), n) / std::pow(d, n - 1);
    nplain += wt * std::pow(std::abs(fk), n);
  }
  nf = degenerate ? std::numeric_limits<double>::infinity() : std::pow(nf, 1.0 / n);
  nfp = degenerate ? std::numeric_limits<double>::infinity() : std::pow(nfp, 1.0 / n);
  nplain = std::pow(nplain, 1.0 / n);

  L.abp_upper.lhs = L.max_w;
  L.abp_upper.rhs = sup_psi + L.abp_constant * nf;
  L.abp_upper.slack = L.abp_upper.rhs - L.abp_upper.lhs;
  L.abp_upper.holds = L.abp_upper.slack >= -L.tolerance;

  L.abp_lower.lhs = L.min_w;
  L.abp_lower.rhs = min_psi - L.abp_constant * nfp;
  L.abp_lower.slack = L.abp_lower.lhs - L.abp_lower.rhs;
  L.abp_lower.holds = L.abp_lower.slack >= -L.tolerance;

  // dual side: w* = G(d) - d G'(d) over the gradient image
  {
    double sup_in_star = -std::numeric_limits<double>::infinity(), sup_bd_star = -std::numeric_limits<double>::infinity();
    bool fine = !degenerate;
    for (int k = 0; k < dd.n_interior && fine; ++k) sup_in_star = std::max(sup_in_star, prob.G.wstar(t.det[static_cast<std::size_t>(k)]));
    try {
      for (int k = dd.n_interior; k < dd.n_nodes() && fine; ++k) {
        const Vec2 p = dd.pos[static_cast<std::size_t>(k)];
        sup_bd_star = std::max(sup_bd_star, prob.G.wstar(prob.G.invert_w(prob.psi(p.x, p.y))));
      }
    } catch (const std::exception&) {
      fine = false;
    }
    double dual_diam = 0.0;
    for (int i = 0; i < dd.n_nodes(); i += std::max(1, dd.n_nodes() / 400)) {
      for (int j = 0; j < dd.n_nodes(); j += std::max(1, dd.n_nodes() / 400)) {
        dual_diam = std::max(dual_diam, norm(grads[static_cast<std::size_t>(i)] - grads[static_cast<std::size_t>(j)]));
      }
    }
    L.abp_dual.lhs = sup_in_star;
    L.abp_dual.rhs = fine ? sup_bd_star + dual_diam / (n * std::pow(unit_ball_volume(n), 1.0 / n)) * nplain
                          : std::numeric_limits<double>::quiet_NaN();
    L.abp_dual.slack = L.abp_dual.rhs - L.abp_dual.lhs;
    L.abp_dual.holds = fine && L.abp_dual.slack >= -L.tolerance;
  }

  L.aleksandrov.lhs = L.sup_abs_u;
  L.aleksandrov.rhs = sup_phi + 2.0 * diam * std::pow(std::max(L.integral_det, 0.0), 1.0 / n);
  L.aleksandrov.slack = L.aleksandrov.rhs - L.aleksandrov.lhs;
  L.aleksandrov.holds = L.aleksandrov.slack >= -L.tolerance;

  L.J = degenerate ? std::numeric_limits<double>::quiet_NaN() : functional_J(u, f, prob.G);
  L.traces = boundary_traces(u, prob.phi);
  return L;
}

}  // namespace abreu
