#include <gtest/gtest.h>

#include <cmath>

#include "abreu/legendre.hpp"
#include "oracles.hpp"

using namespace abreu;

namespace {

DomainPtr disk(double h) { return build_grid(ConvexDomain::disk(1.0), h); }
double half_r2(double x, double y) { return 0.5 * (x * x + y * y); }
double zero(double, double) { return 0.0; }
double one(double, double) { return 1.0; }

struct ManufacturedFields {
  oracle::Manufactured m{0.0};
  Sampler u = [this](double x, double y) { return m.u(x, y); };
  Sampler w = [this](double x, double y) { return m.w(x, y); };
  Sampler f = [this](double x, double y) { return m.f(x, y); };
};

}  // namespace

TEST(LegendreTransform, QuadraticIsSelfDual) {
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto u = ScalarField::sample(disk(h), half_r2);
    const auto d = legendre_transform(u);
    EXPECT_TRUE(d.primal_convex);
    ASSERT_GT(d.masked_count(), 100);
    for (int n = 0; n < d.size(); ++n) {
      if (!d.mask[static_cast<std::size_t>(n)]) continue;
      const Vec2 y = d.y(n);
      ASSERT_NEAR(d.value[static_cast<std::size_t>(n)], 0.5 * dot(y, y), h) << "y = " << y.x << ", " << y.y;
      EXPECT_LE(norm(y), 1.0);
    }
  }
}

TEST(LegendreTransform, QuarticAlongRays) {
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto u = ScalarField::sample(disk(h), [](double x, double y) {
      const double r2 = x * x + y * y;
      return 0.25 * r2 * r2;
    });
    const auto d = legendre_transform(u);
    double err = 0.0;
    for (int n = 0; n < d.size(); ++n) {
      if (!d.mask[static_cast<std::size_t>(n)]) continue;
      const double s = norm(d.y(n));
      err = std::max(err, std::abs(d.value[static_cast<std::size_t>(n)] - 0.75 * std::pow(s, 4.0 / 3)));
    }
    EXPECT_LE(err, h);
  }
}

TEST(LegendreTransform, YoungInequalityAndEqualityOnGradients) {
  const double h = 1.0 / 16;
  ManufacturedFields mf;
  const auto u = ScalarField::sample(disk(h), mf.u);
  const auto d = legendre_transform(u);
  const auto& dd = u.domain();
  for (int q = 0; q < dd.n_nodes(); ++q) {
    const Vec2 x = dd.pos[static_cast<std::size_t>(q)];
    for (int n = 0; n < d.size(); ++n) {
      ASSERT_GE(u[q] + d.value[static_cast<std::size_t>(n)] - dot(x, d.y(n)), -1e-12);
    }
  }
  const auto t = differentiate(u);
  for (int q = 0; q < dd.n_interior; ++q) {
    const Vec2 y = t.grad[static_cast<std::size_t>(q)];
    if (!d.gradient_at(y)) continue;
    // near-equality at the dual node closest to Du(x)
    const Vec2 x = dd.pos[static_cast<std::size_t>(q)];
    const double s = y.x / d.spacing, r = y.y / d.spacing;
    const int i = static_cast<int>(std::round(s)), j = static_cast<int>(std::round(r));
    const Vec2 yn{d.spacing * i, d.spacing * j};
    const double gap = u[q] + d.value[static_cast<std::size_t>(d.index(i, j))] - dot(x, yn);
    EXPECT_LE(gap, 2 * h) << "node " << q;
  }
}

TEST(LegendreTransform, GradientInversionAndDeterminantProduct) {
  ManufacturedFields mf;
  std::vector<double> inversion, product;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    const auto u = ScalarField::sample(disk(h), mf.u);
    const auto d = legendre_transform(u);
    const auto& dd = u.domain();
    const auto t = differentiate(u);
    double ei = 0.0, ep = 0.0;
    int checked = 0;
    for (int q = 0; q < dd.n_interior; ++q) {
      if (dd.dist[static_cast<std::size_t>(q)] < 3 * h) continue;
      const Vec2 y = t.grad[static_cast<std::size_t>(q)];
      const auto g = d.gradient_at(y);
      const auto det = d.det_at(y);
      if (!g || !det) continue;
      ei = std::max(ei, norm(*g - dd.pos[static_cast<std::size_t>(q)]));
      ep = std::max(ep, std::abs(t.det[static_cast<std::size_t>(q)] * *det - 1.0));
      ++checked;
    }
    EXPECT_GT(checked, 50);
    EXPECT_LE(ei, 2 * h);
    EXPECT_LE(ep, 10 * h);
    inversion.push_back(ei);
    product.push_back(ep);
  }
  EXPECT_LT(inversion[1], inversion[0]);
  EXPECT_LT(product[1], product[0]);
}

TEST(LegendreTransform, MidpointConvexOnMask) {
  const double h = 1.0 / 32;
  ManufacturedFields mf;
  const auto d = legendre_transform(ScalarField::sample(disk(h), mf.u));
  for (int n = 0; n < d.size(); ++n) {
    if (d.depth[static_cast<std::size_t>(n)] < 1) continue;
    const int i = d.col(n), j = d.row(n);
    auto v = [&](int a, int b) { return d.value[static_cast<std::size_t>(d.index(i + a, j + b))]; };
    for (const auto& e : {std::pair{1, 0}, std::pair{0, 1}, std::pair{1, 1}, std::pair{1, -1}}) {
      ASSERT_LE(v(0, 0), 0.5 * (v(e.first, e.second) + v(-e.first, -e.second)) + 1e-8 + h * h);
    }
  }
}

TEST(LegendreTransform, Involution) {
  ManufacturedFields mf;
  for (double h : {1.0 / 16, 1.0 / 32}) {
    for (const Sampler& s : {Sampler(half_r2), mf.u}) {
      const auto u = ScalarField::sample(disk(h), s);
      EXPECT_LE(involution_error(u, legendre_transform(u)), 3 * h);
    }
  }
}

TEST(DualEquation, QuadraticConstantWeight) {
  const auto u = ScalarField::sample(disk(1.0 / 32), half_r2);
  for (const auto& G : {GFunction::abreu_log(2), GFunction::power(0.25, 2)}) {
    const auto d = legendre_transform(u);
    const auto ws = dual_weight(d, G);
    const double expected = G.wstar(1.0);
    for (std::size_t n = 0; n < ws.size(); ++n) {
      if (d.depth[n] < 1) continue;
      ASSERT_NEAR(ws[n], expected, 1e-8);
    }
    const auto r = dual_equation_residual(u, std::nullopt, zero, G);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_GE(r.nodes, 10);
  }
  EXPECT_NEAR(GFunction::abreu_log(2).wstar(1.0), -1.0, 1e-15);
}

TEST(DualEquation, ManufacturedConvergesUnderDualRefinement) {
  ManufacturedFields mf;
  const auto u = ScalarField::sample(disk(1.0 / 32), mf.u);
  const auto w = ScalarField::sample(u.domain_ptr(), mf.w);
  const auto G = GFunction::abreu_log(2);
  std::vector<double> res;
  for (double k : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    LegendreOptions opt;
    opt.spacing = k;
    opt.smooth = mf.u;
    const auto r = dual_equation_residual(u, w, mf.f, G, opt);
    EXPECT_LE(r.primal_residual, 1e-2);
    res.push_back(r.residual);
  }
  EXPECT_GE(std::log2(res[0] / res[1]), 1.0);
  EXPECT_GE(std::log2(res[1] / res[2]), 1.0);
}

TEST(DualEquation, TinyMaskIsRejected) {
  const auto u = ScalarField::sample(disk(1.0 / 8), half_r2);
  LegendreOptions opt;
  opt.spacing = 0.4;
  EXPECT_THROW(dual_equation_residual(u, std::nullopt, zero, GFunction::abreu_log(2), opt), ResolutionError);
}

TEST(DualFunctional, QuadraticExamples) {
  const double h = 1.0 / 32;
  const auto u = ScalarField::sample(disk(h), half_r2);
  const auto G = GFunction::abreu_log(2);
  EXPECT_NEAR(dual_functional(u, zero, G).value, 0.0, 5 * h);
  EXPECT_NEAR(dual_functional(u, one, G).value, -kPi / 4, 5 * h);
}

TEST(DualFunctional, ChangeOfVariables) {
  const double h = 1.0 / 32;
  ManufacturedFields mf;
  const auto u = ScalarField::sample(disk(h), mf.u);
  const auto G = GFunction::abreu_log(2);
  const auto t = differentiate(u);
  ScalarField g = ScalarField::constant(u.domain_ptr(), 0.0);
  for (int q = 0; q < u.domain().n_interior; ++q) g[q] = G.G(t.det[static_cast<std::size_t>(q)]);
  for (int b = u.domain().n_interior; b < u.domain().n_nodes(); ++b) {
    const Vec2 p = u.domain().pos[static_cast<std::size_t>(b)];
    g[b] = G.G(oracle::Manufactured::det(norm(p)));
  }
  LegendreOptions opt;
  opt.smooth = mf.u;
  EXPECT_NEAR(dual_functional(u, zero, G, opt).energy, integrate(g), 5 * h);
}
