#include <gtest/gtest.h>

#include <cmath>

#include "abreu/sbvp.hpp"
#include "oracles.hpp"

using namespace abreu;

namespace {

DomainPtr disk(double h) { return build_grid(ConvexDomain::disk(1.0), h); }
double half_r2(double x, double y) { return 0.5 * (x * x + y * y); }
double one(double, double) { return 1.0; }

double max_diff(const ScalarField& a, const Sampler& s) {
  double e = 0.0;
  const auto& dd = a.domain();
  for (int k = 0; k < dd.n_nodes(); ++k) e = std::max(e, std::abs(a[k] - s(dd.pos[k].x, dd.pos[k].y)));
  return e;
}

}  // namespace

TEST(SolveSBVP, AbreuQuadraticFixedPoint) {
  const double h = 1.0 / 32;
  const auto dd = disk(h);
  const SBVPProblem prob(GFunction::abreu_log(2), dd, ScalarField::constant(dd, 0.0), half_r2, one);
  const auto res = solve_sbvp(prob);
  ASSERT_TRUE(res.report.converged()) << res.report.message;
  EXPECT_LE(res.report.outer_iterations, 10);
  EXPECT_LE(max_diff(res.u, half_r2), 5 * h * h);
  EXPECT_LE(max_diff(res.w, one), 5 * h * h);
  ASSERT_TRUE(res.report.ledger.has_value());
}

TEST(SolveSBVP, PowerQuadraticFixedPoint) {
  const double h = 1.0 / 32;
  const auto dd = disk(h);
  const SBVPProblem prob(GFunction::power(0.25, 2), dd, ScalarField::constant(dd, 0.0), half_r2, one);
  const auto res = solve_sbvp(prob);
  ASSERT_TRUE(res.report.converged());
  EXPECT_LE(max_diff(res.u, half_r2), 5 * h * h);
  EXPECT_LE(max_diff(res.w, one), 5 * h * h);
}

TEST(Residuals, ExactAndOffsetPairs) {
  const auto dd = disk(1.0 / 32);
  const auto G = GFunction::abreu_log(2);
  const auto u = ScalarField::sample(dd, half_r2);
  const auto zero = ScalarField::constant(dd, 0.0);
  const auto r0 = residuals(u, ScalarField::constant(dd, 1.0), zero, G);
  EXPECT_LE(r0.r1, 1e-10);
  EXPECT_LE(r0.r2, 1e-10);
  const auto r1 = residuals(u, ScalarField::constant(dd, 2.0), zero, G);
  EXPECT_NEAR(r1.r2, 1.0, 1e-10);
  const auto bad = residuals(ScalarField::sample(dd, [](double x, double y) { return x * y; }), ScalarField::constant(dd, 1.0), zero, G);
  EXPECT_TRUE(std::isinf(bad.r2));
  EXPECT_GE(bad.bad_node, 0);
}

TEST(SolveSBVP, ManufacturedOracleIsConsistent) {
  // the closed-form right side agrees with the discrete operator on a fine grid
  const oracle::Manufactured m{0.25};
  const auto dd = disk(1.0 / 128);
  const auto U = differentiate(ScalarField::sample(dd, [&](double x, double y) { return m.u(x, y); }));
  const auto Lw = apply_L(U, ScalarField::sample(dd, [&](double x, double y) { return m.w(x, y); }));
  double e = 0.0, scale = 0.0;
  for (int k = 0; k < dd->n_interior; ++k) {
    const double f = m.f(dd->pos[k].x, dd->pos[k].y);
    e = std::max(e, std::abs(Lw[k] - f));
    scale = std::max(scale, std::abs(f));
  }
  EXPECT_LT(e, 1e-3 * scale);
}

TEST(SolveSBVP, ManufacturedRecovery) {
  const oracle::Manufactured m{0.25};
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto dd = disk(h);
    const SBVPProblem prob(GFunction::power(0.25, 2), dd,
                           ScalarField::sample(dd, [&](double x, double y) { return m.f(x, y); }),
                           [&](double x, double y) { return m.u(x, y); }, [&](double x, double y) { return m.w(x, y); });
    SBVPOptions opt;
    opt.damping = 1.0;
    const auto res = solve_sbvp(prob, opt);
    ASSERT_TRUE(res.report.converged()) << res.report.message;
    EXPECT_LE(max_diff(res.u, [&](double x, double y) { return m.u(x, y); }), 10 * h * h);
    const auto r = residuals(res.u, res.w, prob);
    EXPECT_LE(std::max(r.r1, r.r2), 1e-6 * (1 + max_abs_interior(prob.f)));
  }
}

TEST(SolveSBVP, FixedPointConsistency) {
  const oracle::Manufactured m{0.25};
  const auto dd = disk(1.0 / 16);
  const SBVPProblem prob(GFunction::power(0.25, 2), dd, ScalarField::sample(dd, [&](double x, double y) { return m.f(x, y); }),
                         [&](double x, double y) { return m.u(x, y); }, [&](double x, double y) { return m.w(x, y); });
  SBVPOptions opt;
  opt.tol = 1e-9;
  opt.damping = 1.0;
  const auto a = solve_sbvp(prob, opt);
  ASSERT_TRUE(a.report.converged());
  SBVPOptions again = opt;
  again.initial_u = a.u;
  again.initial_w = a.w;
  const auto b = solve_sbvp(prob, again);
  ASSERT_TRUE(b.report.converged());
  EXPECT_LE(b.report.outer_iterations, 1);
  EXPECT_LE((a.u.values() - b.u.values()).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LE((a.w.values() - b.w.values()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(SolveSBVP, DampingMonotonicity) {
  const auto dd = disk(1.0 / 16);
  const SBVPProblem prob(GFunction::abreu_log(2), dd, ScalarField::constant(dd, 0.0), half_r2, one);
  for (double lambda : {0.25, 0.5, 1.0}) {
    SBVPOptions opt;
    opt.damping = lambda;
    opt.continuation = false;
    opt.initial_w = ScalarField::sample(dd, [](double x, double y) { return 1.0 + 0.3 * (1 - x * x - y * y) + 0.1 * x; });
    const auto res = solve_sbvp(prob, opt);
    ASSERT_TRUE(res.report.converged()) << lambda;
    ASSERT_GE(res.report.r1.size(), 2u);
    for (std::size_t i = 1; i < res.report.r1.size(); ++i) EXPECT_LT(res.report.r1[i], res.report.r1[i - 1]) << lambda;
  }
}

TEST(SolveSBVP, NeverReturnsNonpositiveW) {
  // theta < 0 violates B2; pushing f up must end in convergence or a reported breakdown
  const auto dd = disk(1.0 / 16);
  for (double amp : {1.0, 10.0, 100.0}) {
    const SBVPProblem prob(GFunction::power(-1.0, 2), dd, ScalarField::constant(dd, amp), half_r2, one);
    SBVPOptions opt;
    opt.max_outer = 60;
    const auto res = solve_sbvp(prob, opt);
    if (res.report.converged()) {
      EXPECT_GT(res.w.values().minCoeff(), 0.0);
    } else {
      EXPECT_NE(res.report.status, SolveStatus::converged);
      if (res.report.status == SolveStatus::positivity_breakdown) {
        EXPECT_GE(res.report.breakdown_node, 0);
      }
    }
    if (amp == 100.0) {
      EXPECT_EQ(res.report.status, SolveStatus::positivity_breakdown) << res.report.message;
    }
  }
}

TEST(SBVPProblem, RejectsNonpositivePsi) {
  const auto dd = disk(1.0 / 8);
  EXPECT_THROW(SBVPProblem(GFunction::abreu_log(2), dd, ScalarField::constant(dd, 0.0), half_r2,
                           [](double x, double) { return x; }),
               DomainError);
}
