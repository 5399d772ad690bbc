#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "abreu/discrete_ops.hpp"
#include "abreu/radial.hpp"

using namespace abreu;

namespace {

std::vector<double> uniform(double a, double b, std::size_t n) {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return r;
}

}  // namespace

TEST(MakeCase, ExponentsForEachCase) {
  const auto a = make_case(RadialCase::i, 2, 1.5);
  EXPECT_NEAR(a.alpha(), 1.1, 1e-14);
  EXPECT_NEAR(a.theta(), 1.0 / 12, 1e-14);

  const auto b = make_case(RadialCase::ii, 2, -1.0);
  EXPECT_NEAR(b.alpha(), 4.0 / 3, 1e-14);
  EXPECT_NEAR(b.f_exponent(), 0.0, 1e-14);
  EXPECT_GT(b.C2(), 0.0);

  const auto c = make_case(RadialCase::iii, 2, -0.25);
  EXPECT_NEAR(c.alpha(), 13.0 / 12, 1e-14);
  const double n = 2, theta = -0.25;
  EXPECT_NEAR(c.f_exponent(), -1.0 - 3 * n * theta / 4, 1e-14);
  const double p = n / (1 + n * theta / 2);
  EXPECT_NEAR(p, 8.0 / 3, 1e-14);
  EXPECT_GT(c.f_exponent(), -n / p);
}

TEST(MakeCase, RangeViolations) {
  EXPECT_THROW(make_case(RadialCase::i, 2, 1.0), DomainError);
  EXPECT_THROW(make_case(RadialCase::i, 2, 2.0), DomainError);
  EXPECT_THROW(make_case(RadialCase::ii, 2, -0.5), DomainError);
  EXPECT_THROW(make_case(RadialCase::iii, 2, -0.6), DomainError);
  EXPECT_THROW(make_case(RadialCase::iii, 2, 0.0), DomainError);
  EXPECT_THROW(RadialSolution::custom(2, 0.0, 2.5), DomainError);
}

TEST(MakeCase, InvariantsAcrossDimensions) {
  for (int n : {2, 3, 5}) {
    const double nd = n;
    const std::vector<RadialSolution> cases = {make_case(RadialCase::i, n, 0.75 * nd),
                                               make_case(RadialCase::ii, n, -2.0 / nd),
                                               make_case(RadialCase::iii, n, -0.5 / nd)};
    for (const auto& s : cases) {
      SCOPED_TRACE(std::string(to_string(s.tag())) + " n=" + std::to_string(n));
      EXPECT_GT(s.alpha(), 1.0);
      EXPECT_LT(s.alpha(), 2.0);
      EXPECT_LT(s.theta(), 1.0);
      EXPECT_GT(s.C1(), 0.0);
      EXPECT_LE(s.C2_check_error(), 1e-6);
      // w decays monotonically toward the origin
      double prev = s.W(1e-1);
      for (double r = 1e-2; r >= 1e-6; r /= 10) {
        EXPECT_LT(s.W(r), prev);
        prev = s.W(r);
      }
      EXPECT_LT(s.W(1e-6), 1e-2 * s.W(1e-1));
    }
  }
}

TEST(MakeCase, DifferentiatedFluxMatchesPowerLaw) {
  for (const auto& s : {make_case(RadialCase::i, 2, 1.5), make_case(RadialCase::ii, 3, -1.0),
                        make_case(RadialCase::iii, 2, -0.25)}) {
    for (double r = 0.5; r <= 1.0; r += 0.05) {
      const double ds = 1e-4 * r;
      const double num = (s.flux(r + ds) - s.flux(r - ds)) / (2 * ds) / std::pow(r, s.n() - 1);
      EXPECT_NEAR(num / s.f(r), 1.0, 1e-6) << "r = " << r;
    }
  }
}

TEST(RadialOperator, HandExamples) {
  const auto r = uniform(0.1, 1.0, 200);
  std::vector<double> v, one, sq;
  for (double x : r) {
    v.push_back(0.5 * x * x);
    one.push_back(1.0);
    sq.push_back(x * x);
  }
  for (int n : {2, 3, 4}) {
    for (double f : radial_operator(v, one, n, r).f) EXPECT_NEAR(f, 0.0, 1e-12);
  }
  const auto out = radial_operator(v, sq, 2, r);
  for (double f : out.f) EXPECT_NEAR(f, 4.0, 1e-9);
  for (double d : out.det) EXPECT_NEAR(d, 1.0, 1e-9);
}

TEST(RadialOperator, RejectsNonPositiveRadii) {
  const auto r = uniform(0.0, 1.0, 10);
  const std::vector<double> v(10, 1.0);
  EXPECT_THROW(radial_operator(v, v, 2, r), DomainError);
}

TEST(RadialOperator, CaseTwoConstantRightSide) {
  const auto s = make_case(RadialCase::ii, 2, -1.0);
  const auto coarse = sample_radial_operator(s, 0.1, 1.0, 4000);
  EXPECT_LE(relative_spread(coarse.f), 0.02);
  for (double f : coarse.f) EXPECT_NEAR(f / s.C2(), 1.0, 0.02);
}

TEST(RadialOperator, CaseTwoSpreadShrinksInExtendedPrecision) {
  using Wide = boost::multiprecision::cpp_bin_float_50;
  const auto s = make_case(RadialCase::ii, 2, -1.0);
  const double sc = static_cast<double>(relative_spread(sample_radial_operator<Wide>(s, 0.1, 1.0, 4000).f));
  const double sf = static_cast<double>(relative_spread(sample_radial_operator<Wide>(s, 0.1, 1.0, 7999).f));
  EXPECT_GT(sc, 0.0);
  EXPECT_LE(sf, 0.5 * sc);
}

TEST(RadialOperator, WeightMatchesDeterminantPower) {
  for (const auto& s : {make_case(RadialCase::i, 2, 1.5), make_case(RadialCase::ii, 2, -1.0),
                        make_case(RadialCase::iii, 2, -0.25)}) {
    const auto out = sample_radial_operator(s, 0.1, 1.0, 1000);
    for (std::size_t i = 0; i < out.r.size(); ++i) {
      const double w = s.W(out.r[i]);
      ASSERT_NEAR(std::pow(out.det[i], s.theta() - 1) / w, 1.0, 1e-8) << "r = " << out.r[i];
    }
  }
}

TEST(Blowup, CaseTwoSlope) {
  const auto s = make_case(RadialCase::ii, 2, -1.0);
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4};
  const auto prof = blowup_profile(s, 1.0, eps);
  EXPECT_NEAR(prof.integrand_exponent, -5.0 / 3, 1e-12);
  EXPECT_TRUE(prof.divergent);
  EXPECT_NEAR(prof.slope, -2.0 / 3, 0.05);
  EXPECT_NEAR(prof.shell_slope, -2.0 / 3, 1e-6);
  for (std::size_t i = 1; i < prof.mass.size(); ++i) EXPECT_GT(prof.mass[i], prof.mass[i - 1]);
}

TEST(Blowup, IntegrableRegimeConverges) {
  const auto s = RadialSolution::custom(2, -1.0, 1.9);
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  const auto prof = blowup_profile(s, 0.4, eps);
  EXPECT_FALSE(prof.divergent);
  EXPECT_GT(prof.integrand_exponent, -1.0);
  EXPECT_LT(std::abs(prof.slope), 0.05);
  EXPECT_LT(prof.mass.back() - prof.mass[prof.mass.size() - 2], 1e-3 * prof.mass.back());
}

TEST(Blowup, CaseOneDiverges) {
  const auto s = make_case(RadialCase::i, 2, 1.5);
  const std::vector<double> eps = {1e-1, 1e-2, 1e-3};
  const auto prof = blowup_profile(s, 1.5, eps);
  EXPECT_TRUE(prof.divergent);
  EXPECT_LT(s.alpha() - 4, -2.0);
  EXPECT_NEAR(prof.shell_slope, prof.integrand_exponent + 1, 1e-6);
  EXPECT_GT(prof.mass.back(), 1e3 * prof.mass.front());
}

TEST(Blowup, RejectsBadSequences) {
  const auto s = make_case(RadialCase::ii, 2, -1.0);
  const std::vector<double> rising = {1e-2, 1e-1};
  const std::vector<double> tiny = {1e-1, 1e-7};
  EXPECT_THROW(blowup_profile(s, 1.0, rising), DomainError);
  EXPECT_THROW(blowup_profile(s, 1.0, tiny), DomainError);
}

TEST(RadialGrid, CaseTwoResidualSecondOrder) {
  const auto s = make_case(RadialCase::ii, 2, -1.0);
  std::vector<double> err;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto dd = build_grid(ConvexDomain::disk(1.0), h);
    const auto u = ScalarField::sample(dd, [&](double x, double y) { return s.u(x, y); });
    const auto w = ScalarField::sample(dd, [&](double x, double y) { return s.w(x, y); });
    const auto Lw = apply_L(differentiate(u), w);
    double e = 0.0;
    for (int k = 0; k < dd->n_interior; ++k) {
      const double r = std::hypot(dd->pos[k].x, dd->pos[k].y);
      if (r >= 0.2 && r <= 0.9) e = std::max(e, std::abs(Lw[k] - s.C2()));
    }
    err.push_back(e);
  }
  EXPECT_LT(err[2], err[1]);
  EXPECT_GE(std::log2(err[1] / err[2]), 1.5);
  EXPECT_GE(std::log2(err[0] / err[1]), 1.5);
}
