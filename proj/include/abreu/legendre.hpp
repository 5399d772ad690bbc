#pragma once

// Discrete Legendre transform u*(y) = sup_x (x.y - u(x)) and checks of the dual equation
//   U*^{ij} w*_ij = -f(Du*) det D^2 u*,  w* = G(1/det D^2 u*) - G'(1/det D^2 u*) / det D^2 u*.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "abreu/discrete_ops.hpp"
#include "abreu/errors.hpp"
#include "abreu/gfun.hpp"

namespace abreu {

struct LegendreOptions {
  double spacing = 0.0;  // dual grid spacing; 0 selects h/2
  Sampler smooth;        // closed form of u; when set, each sup is refined by Newton on Du(x) = y
};

/// u* on a uniform lattice y = spacing * (i, j) covering the gradient image.
struct DualField {
  double spacing = 0.0;
  int i0 = 0, j0 = 0, nx = 0, ny = 0;
  std::vector<double> value;      // u*
  std::vector<Vec2> maximizer;    // x attaining the sup
  std::vector<char> mask;         // inside the gradient hull shrunk by one spacing
  std::vector<int> depth;         // layers of masked neighbours around a node, capped at kMaxDepth
  std::vector<char> has_derivs;   // all 8 lattice neighbours exist
  std::vector<Vec2> grad;         // centred differences of u*
  std::vector<Sym2> hess;
  std::vector<Vec2> hull;         // counter-clockwise convex hull of the gradient samples
  double primal_min_eig = 0.0;    // smallest Hessian eigenvalue of u over interior nodes
  bool primal_convex = false;

  static constexpr int kMaxDepth = 8;

  int size() const { return nx * ny; }
  int index(int i, int j) const { return (j - j0) * nx + (i - i0); }
  bool in_grid(int i, int j) const { return i >= i0 && i < i0 + nx && j >= j0 && j < j0 + ny; }
  int col(int n) const { return i0 + n % nx; }
  int row(int n) const { return j0 + n / nx; }
  Vec2 y(int n) const { return {spacing * col(n), spacing * row(n)}; }
  int masked_count() const { return static_cast<int>(std::count(mask.begin(), mask.end(), 1)); }

  /// Bilinear interpolation of a nodal quantity; nullopt unless all four corners have depth >= 1.
  template <class T, class Get>
  std::optional<T> interpolate(Vec2 p, Get get) const {
    const double s = p.x / spacing, t = p.y / spacing;
    const int i = static_cast<int>(std::floor(s)), j = static_cast<int>(std::floor(t));
    const double a = s - i, b = t - j;
    const int corners[4][2] = {{i, j}, {i + 1, j}, {i, j + 1}, {i + 1, j + 1}};
    for (const auto& c : corners) {
      if (!in_grid(c[0], c[1]) || depth[static_cast<std::size_t>(index(c[0], c[1]))] < 1) return std::nullopt;
    }
    auto at = [&](int ci, int cj) { return get(static_cast<std::size_t>(index(ci, cj))); };
    return (1 - b) * ((1 - a) * at(i, j) + a * at(i + 1, j)) + b * ((1 - a) * at(i, j + 1) + a * at(i + 1, j + 1));
  }

  std::optional<Vec2> gradient_at(Vec2 p) const {
    return interpolate<Vec2>(p, [&](std::size_t n) { return grad[n]; });
  }
  std::optional<double> det_at(Vec2 p) const {
    return interpolate<double>(p, [&](std::size_t n) { return hess[n].det(); });
  }
};

namespace detail {

inline double cross(Vec2 o, Vec2 a, Vec2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

/// Andrew's monotone chain, counter-clockwise without collinear points.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  if (pts.size() < 3) return pts;
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

/// Signed distance to the hull boundary, positive inside.
inline double hull_depth(const std::vector<Vec2>& hull, Vec2 p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 a = hull[i], b = hull[(i + 1) % hull.size()];
    const double len = norm(b - a);
    if (len > 0) d = std::min(d, cross(a, b, p) / len);
  }
  return d;
}

inline Vec2 sampler_gradient(const Sampler& s, Vec2 p, double step) {
  return {(s(p.x + step, p.y) - s(p.x - step, p.y)) / (2 * step), (s(p.x, p.y + step) - s(p.x, p.y - step)) / (2 * step)};
}

inline Sym2 sampler_hessian2(const Sampler& f, Vec2 p, double s) {
  const double c = f(p.x, p.y);
  return {(f(p.x + s, p.y) - 2 * c + f(p.x - s, p.y)) / (s * s),
          (f(p.x + s, p.y + s) - f(p.x + s, p.y - s) - f(p.x - s, p.y + s) + f(p.x - s, p.y - s)) / (4 * s * s),
          (f(p.x, p.y + s) - 2 * c + f(p.x, p.y - s)) / (s * s)};
}

/// Newton on Du(x) = y from x0; nullopt when it leaves the domain or stalls.
inline std::optional<Vec2> newton_maximizer(const Sampler& s, const ConvexDomain& dom, Vec2 y, Vec2 x0) {
  Vec2 x = x0;
  for (int it = 0; it < 30; ++it) {
    const Vec2 r = sampler_gradient(s, x, 1e-5) - y;
    if (norm(r) < 1e-12) return x;
    const Sym2 H = sampler_hessian2(s, x, 1e-4);
    if (!(H.min_eig() > 0)) return std::nullopt;
    x = x - H.inverse().apply(r);
    if (!(dom.rho(x) <= 0.0)) return std::nullopt;
  }
  return norm(sampler_gradient(s, x, 1e-5) - y) < 1e-9 ? std::optional<Vec2>(x) : std::nullopt;
}

}  // namespace detail

inline DualField legendre_transform(const ScalarField& u, const LegendreOptions& opt = {}) {
  const auto& dd = u.domain();
  const int N = dd.n_nodes();
  const auto t = differentiate(u);
  const auto grads = node_gradients(u, t);
  const auto jets = boundary_jets(u);
  std::vector<Sym2> hess(t.hess);
  for (const auto& j : jets) hess.push_back(j.hess);

  DualField out;
  out.spacing = opt.spacing > 0 ? opt.spacing : 0.5 * dd.h;
  const double k = out.spacing;
  out.primal_min_eig = std::numeric_limits<double>::infinity();
  for (const auto& H : t.hess) out.primal_min_eig = std::min(out.primal_min_eig, H.min_eig());
  out.primal_convex = out.primal_min_eig >= -1e-8;
  out.hull = detail::convex_hull(grads);

  double xlo = grads[0].x, xhi = xlo, ylo = grads[0].y, yhi = ylo;
  for (const Vec2& g : grads) {
    xlo = std::min(xlo, g.x), xhi = std::max(xhi, g.x);
    ylo = std::min(ylo, g.y), yhi = std::max(yhi, g.y);
  }
  out.i0 = static_cast<int>(std::floor(xlo / k)) - 1;
  out.j0 = static_cast<int>(std::floor(ylo / k)) - 1;
  out.nx = static_cast<int>(std::ceil(xhi / k)) + 1 - out.i0 + 1;
  out.ny = static_cast<int>(std::ceil(yhi / k)) + 1 - out.j0 + 1;

  Eigen::MatrixX2d X(N, 2);
  for (int q = 0; q < N; ++q) X.row(q) << dd.pos[static_cast<std::size_t>(q)].x, dd.pos[static_cast<std::size_t>(q)].y;
  const auto M = static_cast<std::size_t>(out.size());
  out.value.resize(M);
  out.maximizer.resize(M);
  out.mask.assign(M, 0);
  Eigen::VectorXd score(N);
  for (int n = 0; n < out.size(); ++n) {
    const Vec2 y = out.y(n);
    score.noalias() = X * Eigen::Vector2d(y.x, y.y) - u.values();
    Eigen::Index best;
    double v = score.maxCoeff(&best);
    const int b = static_cast<int>(best);
    Vec2 x = dd.pos[static_cast<std::size_t>(b)];
    if (opt.smooth) {
      if (const auto xn = detail::newton_maximizer(opt.smooth, dd.domain, y, x)) {
        const double vn = dot(*xn, y) - opt.smooth(xn->x, xn->y);
        if (vn >= v) v = vn, x = *xn;
      }
    } else {
      // one Newton step on the local quadratic model at the best node
      const Sym2& H = hess[static_cast<std::size_t>(b)];
      if (H.min_eig() > 0) {
        const Vec2 r = y - grads[static_cast<std::size_t>(b)];
        const Vec2 step = H.inverse().apply(r);
        if (norm(step) <= 2 * dd.h) {
          v += 0.5 * dot(r, step);
          x = x + step;
        }
      }
    }
    out.value[static_cast<std::size_t>(n)] = v;
    out.maximizer[static_cast<std::size_t>(n)] = x;
    out.mask[static_cast<std::size_t>(n)] = detail::hull_depth(out.hull, y) >= k ? 1 : 0;
  }

  out.depth.assign(M, 0);
  for (std::size_t n = 0; n < M; ++n) out.depth[n] = out.mask[n] ? 0 : -1;
  for (int level = 0; level < DualField::kMaxDepth; ++level) {
    std::vector<int> next = out.depth;
    for (int n = 0; n < out.size(); ++n) {
      if (out.depth[static_cast<std::size_t>(n)] != level) continue;
      bool all = true;
      for (int dj = -1; dj <= 1 && all; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          const int i = out.col(n) + di, j = out.row(n) + dj;
          if (!out.in_grid(i, j) || out.depth[static_cast<std::size_t>(out.index(i, j))] < level) {
            all = false;
            break;
          }
        }
      }
      if (all) next[static_cast<std::size_t>(n)] = level + 1;
    }
    out.depth = std::move(next);
  }

  out.has_derivs.assign(M, 0);
  out.grad.assign(M, Vec2{});
  out.hess.assign(M, Sym2{});
  for (int n = 0; n < out.size(); ++n) {
    const int i = out.col(n), j = out.row(n);
    if (!out.in_grid(i - 1, j - 1) || !out.in_grid(i + 1, j + 1)) continue;
    auto v = [&](int a, int b) { return out.value[static_cast<std::size_t>(out.index(i + a, j + b))]; };
    const std::size_t s = static_cast<std::size_t>(n);
    out.has_derivs[s] = 1;
    out.grad[s] = {(v(1, 0) - v(-1, 0)) / (2 * k), (v(0, 1) - v(0, -1)) / (2 * k)};
    out.hess[s] = {(v(1, 0) - 2 * v(0, 0) + v(-1, 0)) / (k * k), (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / (4 * k * k),
                   (v(0, 1) - 2 * v(0, 0) + v(0, -1)) / (k * k)};
  }
  return out;
}

struct DualResidual {
  double residual = 0.0;          // max |U*^{ij} w*_ij + f(Du*) det D^2 u*| over deep dual nodes
  double primal_residual = 0.0;   // max |U^{ij} w_ij - f| over primal nodes at distance >= 2h
  int nodes = 0;
  double spacing = 0.0;
  double min_dual_det = 0.0;
  Vec2 worst_y;
};

/// w* at every node of depth >= 1; NaN elsewhere.
inline std::vector<double> dual_weight(const DualField& d, const GFunction& G) {
  std::vector<double> ws(static_cast<std::size_t>(d.size()), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t n = 0; n < ws.size(); ++n) {
    if (d.depth[n] < 1) continue;
    const double det = d.hess[n].det();
    if (det > 0) ws[n] = G.wstar(1.0 / det);
  }
  return ws;
}

inline DualResidual dual_equation_residual(const ScalarField& u, const std::optional<ScalarField>& w, const Sampler& f,
                                           const GFunction& G, const LegendreOptions& opt = {}) {
  const DualField d = legendre_transform(u, opt);
  const auto ws = dual_weight(d, G);
  DualResidual r;
  r.spacing = d.spacing;
  r.min_dual_det = std::numeric_limits<double>::infinity();
  const double k = d.spacing;
  for (int n = 0; n < d.size(); ++n) {
    const auto s = static_cast<std::size_t>(n);
    if (d.depth[s] < 3) continue;
    const int i = d.col(n), j = d.row(n);
    auto W = [&](int a, int b) { return ws[static_cast<std::size_t>(d.index(i + a, j + b))]; };
    const Sym2 D2w{(W(1, 0) - 2 * W(0, 0) + W(-1, 0)) / (k * k), (W(1, 1) - W(1, -1) - W(-1, 1) + W(-1, -1)) / (4 * k * k),
                   (W(0, 1) - 2 * W(0, 0) + W(0, -1)) / (k * k)};
    const double det = d.hess[s].det();
    r.min_dual_det = std::min(r.min_dual_det, det);
    const Vec2 g = d.grad[s];
    const double e = std::abs(d.hess[s].cofactor().contract(D2w) + f(g.x, g.y) * det);
    ++r.nodes;
    if (!(e <= r.residual)) {
      r.residual = e;
      r.worst_y = d.y(n);
    }
  }
  if (r.nodes < 10) throw ResolutionError("dual mask holds " + std::to_string(r.nodes) + " deep nodes; need 10");
  if (w) {
    const auto& dd = u.domain();
    const auto Lw = apply_L(differentiate(u), *w);
    for (int q = 0; q < dd.n_interior; ++q) {
      const Vec2 p = dd.pos[static_cast<std::size_t>(q)];
      if (dd.dist[static_cast<std::size_t>(q)] >= 2 * dd.h) r.primal_residual = std::max(r.primal_residual, std::abs(Lw[q] - f(p.x, p.y)));
    }
  }
  return r;
}

struct DualFunctional {
  double value = 0.0;        // J*
  double energy = 0.0;       // int G(1/det D^2 u*) det D^2 u* dy
  double load = 0.0;         // int f(Du*)(y.Du* - u*) det D^2 u* dy
  int nodes = 0;
};

/// Dual functional by nodal quadrature over the masked lattice.
inline DualFunctional dual_functional(const DualField& d, const Sampler& f, const GFunction& G) {
  DualFunctional J;
  const double cell = d.spacing * d.spacing;
  for (int n = 0; n < d.size(); ++n) {
    const auto s = static_cast<std::size_t>(n);
    if (!d.mask[s] || !d.has_derivs[s]) continue;
    const double det = d.hess[s].det();
    if (!(det > 0)) throw DomainError("dual functional: det D^2 u* <= 0 at a masked node");
    const Vec2 g = d.grad[s], y = d.y(n);
    J.energy += cell * G.G(1.0 / det) * det;
    J.load += cell * f(g.x, g.y) * (dot(y, g) - d.value[s]) * det;
    ++J.nodes;
  }
  if (J.nodes < 10) throw ResolutionError("dual mask holds fewer than 10 nodes");
  J.value = J.energy - J.load;
  return J;
}

inline DualFunctional dual_functional(const ScalarField& u, const Sampler& f, const GFunction& G,
                                      const LegendreOptions& opt = {}) {
  return dual_functional(legendre_transform(u, opt), f, G);
}

/// max |(u*)* - u| over interior primal nodes whose gradient sits where u* has depth >= 1.
inline double involution_error(const ScalarField& u, const DualField& d) {
  const auto& dd = u.domain();
  const auto t = differentiate(u);
  std::vector<int> inner;
  for (int n = 0; n < d.size(); ++n) {
    if (d.mask[static_cast<std::size_t>(n)]) inner.push_back(n);
  }
  double err = 0.0;
  for (int q = 0; q < dd.n_interior; ++q) {
    if (!d.gradient_at(t.grad[static_cast<std::size_t>(q)])) continue;
    const Vec2 x = dd.pos[static_cast<std::size_t>(q)];
    double best = -std::numeric_limits<double>::infinity();
    for (int n : inner) best = std::max(best, dot(x, d.y(n)) - d.value[static_cast<std::size_t>(n)]);
    err = std::max(err, std::abs(best - u[q]));
  }
  return err;
}

}  // namespace abreu
