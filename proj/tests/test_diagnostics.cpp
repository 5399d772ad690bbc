#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "abreu/barrier.hpp"
#include "abreu/diagnostics.hpp"
#include "abreu/sbvp.hpp"
#include "oracles.hpp"

using namespace abreu;

namespace {

DomainPtr disk(double h) { return build_grid(ConvexDomain::disk(1.0), h); }
double half_r2(double x, double y) { return 0.5 * (x * x + y * y); }
double one(double, double) { return 1.0; }

Sym2 random_spd(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> e(0.05, 5.0), a(0.0, 3.14159265358979);
  const double l1 = e(rng), l2 = e(rng), t = a(rng);
  const double c = std::cos(t), s = std::sin(t);
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

}  // namespace

TEST(FunctionalJ, QuadraticValues) {
  for (double h : {1.0 / 32, 1.0 / 64}) {
    const auto dd = disk(h);
    const auto u = ScalarField::sample(dd, half_r2);
    EXPECT_NEAR(functional_J(u, ScalarField::constant(dd, 0.0), GFunction::abreu_log(2)), 0.0, 5 * h);
    EXPECT_NEAR(functional_J(u, ScalarField::constant(dd, 1.0), GFunction::abreu_log(2)), -kPi / 4, 5 * h);
    EXPECT_NEAR(functional_J(u, ScalarField::constant(dd, 0.0), GFunction::power(0.25, 2)), 0.0, 5 * h);
  }
  const auto dd = disk(1.0 / 16);
  EXPECT_THROW(functional_J(ScalarField::sample(dd, [](double x, double y) { return x * y; }), ScalarField::constant(dd, 0.0),
                            GFunction::abreu_log(2)),
               DomainError);
}

TEST(ConcavityGap, HandValues) {
  const auto G = GFunction::abreu_log(2);
  EXPECT_EQ(concavity_gap(Sym2::identity(), Sym2::identity(), G), 0.0);
  EXPECT_NEAR(concavity_gap(2.0 * Sym2::identity(), Sym2::identity(), G), 2.0 - std::log(4.0), 1e-15);
  EXPECT_THROW(concavity_gap({1, 0, -1}, Sym2::identity(), G), DomainError);
}

TEST(ConcavityGap, RandomPairs) {
  std::mt19937_64 rng(2024);
  for (const auto& G : {GFunction::power(0.25, 2), GFunction::abreu_log(2), GFunction::power(-1.0, 2)}) {
    double worst = 1e300;
    for (int i = 0; i < 10000; ++i) worst = std::min(worst, concavity_gap(random_spd(rng), random_spd(rng), G));
    EXPECT_GE(worst, -1e-10);
  }
}

TEST(BoundReport, QuadraticFixedPointHasZeroSlack) {
  const auto dd = disk(1.0 / 32);
  const SBVPProblem prob(GFunction::abreu_log(2), dd, ScalarField::constant(dd, 0.0), half_r2, one);
  const auto res = solve_sbvp(prob);
  ASSERT_TRUE(res.report.converged());
  const auto& L = *res.report.ledger;
  EXPECT_NEAR(L.max_w, 1.0, 1e-9);
  EXPECT_NEAR(L.min_w, 1.0, 1e-9);
  EXPECT_NEAR(L.abp_upper.slack, 0.0, 1e-9);
  EXPECT_NEAR(L.abp_lower.slack, 0.0, 1e-9);
  EXPECT_TRUE(L.estimates_hold());
  EXPECT_TRUE(L.aleksandrov.holds);
  EXPECT_TRUE(L.grad_sup_on_boundary);
  EXPECT_NEAR(L.integral_det, kPi, 5 * dd->h);
  EXPECT_NEAR(L.abp_constant, 2.0 / (2.0 * std::sqrt(kPi)), 1e-15);
}

TEST(BoundReport, MaximumPrincipleForNonpositiveF) {
  const auto dd = disk(1.0 / 16);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng);
    const SBVPProblem prob(GFunction::abreu_log(2), dd,
                           ScalarField::sample(dd, [&](double x, double y) { return -a * (1 + std::sin(3 * x * y + b)); }),
                           [&](double x, double y) { return half_r2(x, y) + 0.2 * c * x; },
                           [&](double x, double y) { return 1.0 + 0.5 * b * x * x + 0.3 * c * y; });
    SBVPOptions opt;
    opt.damping = 1.0;
    const auto res = solve_sbvp(prob, opt);
    ASSERT_TRUE(res.report.converged()) << res.report.message;
    const auto& L = *res.report.ledger;
    EXPECT_GE(L.min_w, prob.min_psi() - 1e-6);
    EXPECT_TRUE(L.abp_upper.holds);
    EXPECT_TRUE(L.abp_lower.holds);
    EXPECT_TRUE(L.aleksandrov.holds);
  }
}

TEST(BoundReport, ManufacturedIntegralOfDet) {
  const oracle::Manufactured m{0.25};
  const auto dd = disk(1.0 / 32);
  const SBVPProblem prob(GFunction::power(0.25, 2), dd, ScalarField::sample(dd, [&](double x, double y) { return m.f(x, y); }),
                         [&](double x, double y) { return m.u(x, y); }, [&](double x, double y) { return m.w(x, y); });
  SBVPOptions opt;
  opt.damping = 1.0;
  const auto res = solve_sbvp(prob, opt);
  ASSERT_TRUE(res.report.converged());
  const auto& L = *res.report.ledger;
  EXPECT_NEAR(L.integral_det, oracle::Manufactured::integral_det_unit_disk(), 0.05 * oracle::Manufactured::integral_det_unit_disk());
  EXPECT_TRUE(L.estimates_hold());
  EXPECT_TRUE(std::isfinite(L.J));
  EXPECT_TRUE(std::isfinite(L.abp_dual.slack));
}

TEST(BoundaryTraces, QuadraticOnDisk) {
  const auto dd = disk(1.0 / 32);
  const auto u = ScalarField::sample(dd, half_r2);
  const auto bar = build_barrier(dd, half_r2);
  ASSERT_TRUE(bar.ok);
  const auto rows = boundary_traces(u, half_r2, &bar);
  ASSERT_EQ(static_cast<int>(rows.size()), dd->n_boundary());
  for (const auto& r : rows) {
    EXPECT_NEAR(r.u_nu, 1.0, dd->h);
    EXPECT_NEAR(r.U_nunu, 1.0, dd->h);
    EXPECT_NEAR(r.K_unu, 1.0, dd->h);
    EXPECT_NEAR(r.E, 0.0, dd->h);
    EXPECT_NEAR(r.E, r.phi_ss, dd->h);
    EXPECT_LE(r.identity_residual, dd->h);
    EXPECT_GE(r.u_nu, -1.0 - dd->h);  // sup |D phi| = 1 on the unit circle
  }
}

TEST(BoundaryTraces, EllipseTraceMatchesBoundaryData) {
  const auto dd = build_grid(ConvexDomain::ellipse(1.0, 0.6), 1.0 / 48);
  auto U = [](double x, double y) { return x * x + 0.7 * y * y + 0.3 * x * y + 0.2 * x; };
  const auto rows = boundary_traces(ScalarField::sample(dd, U), U);
  for (const auto& r : rows) EXPECT_NEAR(r.E, r.phi_ss, 5e-4);
}

TEST(Barrier, ZeroData) {
  const auto dd = disk(1.0 / 24);
  const auto zero = [](double, double) { return 0.0; };
  const auto b = build_barrier(dd, zero, 1e-3);
  ASSERT_TRUE(b.ok);
  EXPECT_EQ(b.mu, 1.0);
  EXPECT_GE(b.min_eig, 1e-3);
  for (int k = dd->n_interior; k < dd->n_nodes(); ++k) {
    EXPECT_NEAR(b.lower(dd->pos[k].x, dd->pos[k].y), 0.0, 1e-10);
    EXPECT_NEAR(b.upper(dd->pos[k].x, dd->pos[k].y), 0.0, 1e-10);
  }
}

TEST(Barrier, ConvexDataNeedsNoLift) {
  const auto dd = disk(1.0 / 24);
  const auto b = build_barrier(dd, half_r2);
  ASSERT_TRUE(b.ok);
  EXPECT_EQ(b.mu, 1.0);
}

TEST(Barrier, ConcaveDataAndIdentities) {
  const auto dd = disk(1.0 / 24);
  auto phi = [](double x, double y) { return -2.0 * (x * x + y * y); };
  const double eps = 1e-3;
  const auto G = GFunction::abreu_log(2);
  const auto b = build_barrier(dd, phi, eps, &G);
  ASSERT_TRUE(b.ok);
  const auto& dom = dd->domain;
  EXPECT_GE(b.mu * std::exp(dom.min_rho()) * dom.eta(), 4.0 - eps);
  const auto t = differentiate(ScalarField::sample(dd, b.lower));
  const auto tu = differentiate(ScalarField::sample(dd, b.upper));
  for (int k = 0; k < dd->n_interior; ++k) {
    const Vec2 p = dd->pos[k];
    EXPECT_NEAR(b.lower(p.x, p.y) + b.upper(p.x, p.y), 2 * phi(p.x, p.y), 1e-12);
    EXPECT_LE(b.lower(p.x, p.y), phi(p.x, p.y));
    EXPECT_GE(b.upper(p.x, p.y), phi(p.x, p.y));
    EXPECT_GE(t.hess[k].min_eig(), eps);
    EXPECT_LE(tu.hess[k].max_eig(), -eps);
    EXPECT_GE(t.det[k], eps * eps);
  }
  ASSERT_TRUE(b.rhs.has_value());
  EXPECT_TRUE(std::isfinite(b.rhs_norm));
}

TEST(BarrierCheck, QuadraticPasses) {
  const auto dd = disk(1.0 / 32);
  const auto c = barrier_check(ScalarField::sample(dd, half_r2), half_r2, 5 * dd->h);
  EXPECT_EQ(c.outcome, BarrierCheck::Outcome::pass);
  EXPECT_EQ(c.mu, 1.0);
  EXPECT_THROW(barrier_check(ScalarField::sample(dd, half_r2), half_r2, dd->h), ResolutionError);
}

TEST(BarrierCheck, ManufacturedPassesPerturbedFails) {
  const oracle::Manufactured m{0.25};
  const auto dd = disk(1.0 / 32);
  auto phi = [&](double x, double y) { return m.u(x, y); };
  const SBVPProblem prob(GFunction::power(0.25, 2), dd, ScalarField::sample(dd, [&](double x, double y) { return m.f(x, y); }),
                         phi, [&](double x, double y) { return m.w(x, y); });
  SBVPOptions opt;
  opt.damping = 1.0;
  const auto res = solve_sbvp(prob, opt);
  ASSERT_TRUE(res.report.converged());
  const double delta = 5 * dd->h;
  const auto ok = barrier_check(res.u, phi, delta);
  EXPECT_EQ(ok.outcome, BarrierCheck::Outcome::pass);
  EXPECT_TRUE(std::isfinite(ok.mu));

  auto bent = res.u;
  for (int k = 0; k < dd->n_interior; ++k)
    if (dd->dist[k] <= delta) bent[k] -= 0.1;
  const auto bad = barrier_check(bent, phi, delta);
  EXPECT_EQ(bad.outcome, BarrierCheck::Outcome::fail);
  ASSERT_GE(bad.worst_node, 0);
  EXPECT_LE(dd->dist[bad.worst_node], delta);
}
