#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "abreu/lma_solver.hpp"
#include "abreu/ma_solver.hpp"

using namespace abreu;

namespace {

DomainPtr disk(double h) { return build_grid(ConvexDomain::disk(1.0), h); }

double half_r2(double x, double y) { return 0.5 * (x * x + y * y); }

double max_diff(const ScalarField& a, const Sampler& s) {
  double e = 0.0;
  const auto& dd = a.domain();
  for (int k = 0; k < dd.n_nodes(); ++k) e = std::max(e, std::abs(a[k] - s(dd.pos[k].x, dd.pos[k].y)));
  return e;
}

}  // namespace

TEST(SolveMA, QuadraticExact) {
  const auto dd = disk(1.0 / 32);
  const auto res = solve_ma(dd, ScalarField::constant(dd, 1.0), half_r2);
  ASSERT_TRUE(res.report.converged) << res.report.message;
  EXPECT_LT(max_diff(res.u, half_r2), 1e-8);
  EXPECT_GE(res.report.min_eigenvalue, 0.5e-6);
}

TEST(SolveMA, QuarticRecoveredSecondOrder) {
  auto r4 = [](double x, double y) { return (x * x + y * y) * (x * x + y * y); };
  std::vector<double> errs;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto dd = disk(h);
    const auto g = ScalarField::sample(dd, [](double x, double y) {
      const double r2 = x * x + y * y;
      return 48.0 * r2 * r2;
    });
    // g vanishes at the origin; a tiny floor keeps the positivity contract
    auto gp = g;
    for (int k = 0; k < dd->n_interior; ++k) gp[k] = std::max(g[k], 1e-14);
    MAConfig cfg;
    cfg.tolerance = 1e-9 * 49.0;
    const auto res = solve_ma(dd, gp, r4, cfg);
    ASSERT_TRUE(res.report.converged) << res.report.message;
    errs.push_back(max_diff(res.u, r4));
  }
  const double order = std::log(errs[0] / errs[2]) / std::log(4.0);
  EXPECT_GE(order, 1.5) << errs[0] << " " << errs[1] << " " << errs[2];
}

TEST(SolveMA, ComparisonPrinciple) {
  const auto dd = disk(1.0 / 24);
  const auto u1 = solve_ma(dd, ScalarField::constant(dd, 1.0), half_r2).u;
  const auto u2 = solve_ma(dd, ScalarField::constant(dd, 2.0), half_r2).u;
  for (int k = 0; k < dd->n_nodes(); ++k) EXPECT_LE(u2[k], u1[k] + 1e-8);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> c(0.5, 2.0), s(0.0, 0.5);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = c(rng), b = s(rng), lift = s(rng);
    const auto g1 = ScalarField::sample(dd, [&](double x, double y) { return a + b * x * x + 0.2 * b * y; });
    const auto g2 = ScalarField::sample(dd, [&](double x, double y) { return a + b * x * x + 0.2 * b * y + lift + 0.1; });
    auto phi = [&](double x, double y) { return half_r2(x, y) + b * x; };
    const auto r1 = solve_ma(dd, g1, phi), r2 = solve_ma(dd, g2, phi);
    ASSERT_TRUE(r1.report.converged && r2.report.converged);
    for (int k = 0; k < dd->n_nodes(); ++k) EXPECT_LE(r2.u[k], r1.u[k] + 1e-8);
    EXPECT_GE(r1.report.min_eigenvalue, 0.0);
  }
}

TEST(SolveMA, RejectsNonpositiveRightSide) {
  const auto dd = disk(1.0 / 16);
  EXPECT_THROW(solve_ma(dd, ScalarField::constant(dd, 0.0), half_r2), DomainError);
}

TEST(SolveMA, ReportsFailureWhenCapped) {
  const auto dd = disk(1.0 / 16);
  MAConfig cfg;
  cfg.max_iterations = 1;
  const auto res = solve_ma(dd, ScalarField::sample(dd, [](double x, double) { return 1.0 + 3 * x * x; }),
                            [](double x, double y) { return 2 * x * x + y * y; }, cfg);
  EXPECT_FALSE(res.report.converged);
  EXPECT_EQ(res.report.residuals.size(), 2u);
}

TEST(SolveMA, NearBoundaryNodeSetsRoundingFloor) {
  // an ellipse whose lattice has an interior node within 1e-3 h of the boundary
  const double h = 1.0 / 32;
  DomainPtr dd;
  for (int i = 1; i < 100 && !dd; ++i) {
    const double e = 0.01 * i;
    auto cand = build_grid(ConvexDomain::ellipse(1.0 + 0.3 * e, 1.0 - 0.3 * e), h);
    const double closest = *std::min_element(cand->dist.begin(), cand->dist.begin() + cand->n_interior);
    if (closest < 1e-3 * h) dd = cand;
  }
  ASSERT_TRUE(dd);
  const Sampler phi = [](double x, double y) { return 0.5 * (x * x + y * y) + 0.1 * x; };
  const auto res = solve_ma(dd, ScalarField::sample(dd, [](double x, double y) { return 1.0 + 0.3 * x * x + 0.2 * y; }), phi);
  ASSERT_TRUE(res.report.converged) << res.report.message;
  EXPECT_GT(res.report.rounding_floor, 0.0);
  EXPECT_LE(res.report.residuals.back(), std::max(1e-9, res.report.rounding_floor));

  const auto d0 = disk(h);
  const auto smooth = solve_ma(d0, ScalarField::constant(d0, 1.0), half_r2);
  EXPECT_LT(smooth.report.rounding_floor, res.report.rounding_floor);
}

TEST(SolveLMA, ConstantsAreHarmonic) {
  const auto dd = disk(1.0 / 32);
  const auto res = solve_lma(dd, TensorField::constant(dd, Sym2::identity()), ScalarField::constant(dd, 0.0),
                             [](double, double) { return 1.0; });
  ASSERT_TRUE(res.report.ok);
  for (int k = 0; k < dd->n_nodes(); ++k) EXPECT_NEAR(res.w[k], 1.0, 1e-10);
}

TEST(SolveLMA, PoissonSecondOrder) {
  auto exact = [](double x, double y) { return 2.0 - x * x - y * y; };
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto dd = disk(h);
    const auto res = solve_lma(dd, TensorField::constant(dd, Sym2::identity()), ScalarField::constant(dd, -4.0),
                               [](double, double) { return 1.0; });
    EXPECT_LT(max_diff(res.w, exact), 1e-9);  // quadratic exactness of the stencils
  }
}

TEST(SolveLMA, QuadraticWithCofactorOfHalfR2) {
  const auto dd = disk(1.0 / 32);
  const auto U = differentiate(ScalarField::sample(dd, half_r2));
  auto r2 = [](double x, double y) { return x * x + y * y; };
  const auto res = solve_lma(dd, U, ScalarField::constant(dd, 4.0), r2);
  EXPECT_LT(max_diff(res.w, r2), 1e-8);
  EXPECT_LE(res.report.residual, 1e-9 * 5.0);
}

TEST(SolveLMA, EllipticityErrorNamesWorstNode) {
  const auto dd = disk(1.0 / 16);
  auto U = TensorField::constant(dd, Sym2::identity());
  U.cof[7] = {1.0, 0.0, -0.5};
  try {
    solve_lma(dd, U, ScalarField::constant(dd, 0.0), [](double, double) { return 1.0; });
    FAIL();
  } catch (const EllipticityError& e) {
    EXPECT_EQ(e.worst_node, 7);
    EXPECT_NEAR(e.min_eigenvalue, -0.5, 1e-15);
  }
}

TEST(SolveLMA, MaximumPrincipleWhenDominant) {
  const auto dd = disk(1.0 / 24);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const double a = u(rng), b = u(rng);
    const auto U = differentiate(ScalarField::sample(dd, [&](double x, double y) { return half_r2(x, y) + 0.2 * a * x * x * x * x + 0.1 * b * y * y * y * y; }));
    const auto f = ScalarField::sample(dd, [&](double x, double y) { return -std::abs(std::sin(3 * a * x + y)) - b; });
    auto psi = [&](double x, double y) { return 1.0 + 0.5 * std::cos(2 * x + b * y); };
    const auto res = solve_lma(dd, U, f, psi);
    ASSERT_TRUE(res.report.ok);
    double min_w = 1e300, min_psi = 1e300, sup_psi = 0.0;
    for (int k = 0; k < dd->n_nodes(); ++k) min_w = std::min(min_w, res.w[k]);
    for (int k = dd->n_interior; k < dd->n_nodes(); ++k) {
      min_psi = std::min(min_psi, res.w[k]);
      sup_psi = std::max(sup_psi, std::abs(res.w[k]));
    }
    EXPECT_GE(min_w, min_psi - 1e-6 * sup_psi) << "dominant=" << res.report.diagonally_dominant;
  }
}

TEST(SolveLMA, Linearity) {
  const auto dd = disk(1.0 / 24);
  const auto U = differentiate(ScalarField::sample(dd, [](double x, double y) { return half_r2(x, y) + x * x * x * x / 10; }));
  const auto f1 = ScalarField::sample(dd, [](double x, double y) { return std::sin(x) + y; });
  const auto f2 = ScalarField::sample(dd, [](double x, double y) { return x * y - 1; });
  const auto p1 = ScalarField::sample(dd, [](double x, double) { return 1 + x; });
  const auto p2 = ScalarField::sample(dd, [](double, double y) { return 2 - y * y; });
  const double a = 0.7, b = -1.3;
  const auto w1 = solve_lma(dd, U, f1, p1).w, w2 = solve_lma(dd, U, f2, p2).w;
  const auto w = solve_lma(dd, U, a * f1 + b * f2, a * p1 + b * p2).w;
  const Eigen::VectorXd comb = a * w1.values() + b * w2.values();
  EXPECT_LE((w.values() - comb).cwiseAbs().maxCoeff(), 1e-9 * comb.cwiseAbs().maxCoeff());
}

TEST(SolveLMA, DivergenceModeCrossCheck) {
  std::vector<double> gaps;
  for (double h : {1.0 / 16, 1.0 / 32, 1.0 / 64}) {
    const auto dd = disk(h);
    const auto U = differentiate(ScalarField::sample(dd, [](double x, double y) {
      const double r2 = x * x + y * y;
      return 0.5 * r2 + r2 * r2 / 12;
    }));
    const auto f = ScalarField::sample(dd, [](double x, double y) { return 1.0 + x * y; });
    auto psi = [](double x, double y) { return 1.0 + 0.3 * x - 0.2 * y; };
    const auto a = solve_lma(dd, U, f, psi, OperatorForm::nondivergence);
    const auto b = solve_lma(dd, U, f, psi, OperatorForm::divergence);
    ASSERT_TRUE(a.report.ok && b.report.ok);
    gaps.push_back((a.w.values() - b.w.values()).cwiseAbs().maxCoeff());
  }
  EXPECT_GT(gaps[0] / gaps[1], 3.0);
  EXPECT_GT(gaps[1] / gaps[2], 3.0);
}
