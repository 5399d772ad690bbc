#pragma once

// Uniformly convex planar domains and their cut-cell grids.

#include <Eigen/Sparse>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abreu/errors.hpp"
#include "abreu/types.hpp"

namespace abreu {

using SpMat = Eigen::SparseMatrix<double>;

enum class DomainKind { disk, ellipse };

struct BoundaryGeometry {
  Vec2 normal;
  double curvature;  // Gauss curvature of the boundary curve
  double rho;
  Vec2 grad_rho;
  Sym2 hess_rho;
};

/// Axis-aligned ellipse (a disk when a == b) centred at the origin with
/// defining function rho = (x^2/a^2 + y^2/b^2 - 1)/2.
class ConvexDomain {
 public:
  static ConvexDomain disk(double R) {
    if (!(R > 0.0)) throw DomainError("disk radius must be positive");
    return ConvexDomain(DomainKind::disk, R, R);
  }
  static ConvexDomain ellipse(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw DomainError("ellipse semi-axes must be positive");
    return ConvexDomain(DomainKind::ellipse, a, b);
  }

  DomainKind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double rho(Vec2 p) const { return 0.5 * (p.x * p.x / (a_ * a_) + p.y * p.y / (b_ * b_) - 1.0); }
  Vec2 grad_rho(Vec2 p) const { return {p.x / (a_ * a_), p.y / (b_ * b_)}; }
  Sym2 hess_rho(Vec2) const { return {1.0 / (a_ * a_), 0.0, 1.0 / (b_ * b_)}; }
  double min_rho() const { return -0.5; }

  /// Uniform convexity constant: D^2 rho >= eta I.
  double eta() const { return std::min(1.0 / (a_ * a_), 1.0 / (b_ * b_)); }

  double size() const { return std::min(a_, b_); }
  double diameter() const { return 2.0 * std::max(a_, b_); }
  double area() const { return kPi * a_ * b_; }
  bool contains(Vec2 p) const { return rho(p) < 0.0; }

  Vec2 boundary_point(double theta) const { return {a_ * std::cos(theta), b_ * std::sin(theta)}; }
  double parameter_of(Vec2 p) const { return std::atan2(p.y / b_, p.x / a_); }

  double curvature_at_parameter(double theta) const {
    const double s = std::sin(theta), c = std::cos(theta);
    const double q = a_ * a_ * s * s + b_ * b_ * c * c;
    return a_ * b_ / (q * std::sqrt(q));
  }

  /// Arclength of the boundary between parameters t0 < t1.
  double arclength(double t0, double t1) const {
    static constexpr std::array<double, 5> x = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                                0.5384693101056831, 0.9061798459386640};
    static constexpr std::array<double, 5> wts = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                                  0.4786286704993665, 0.2369268850561891};
    double sum = 0.0;
    const int panels = 4;
    for (int p = 0; p < panels; ++p) {
      const double lo = t0 + (t1 - t0) * p / panels, hi = t0 + (t1 - t0) * (p + 1) / panels;
      for (int i = 0; i < 5; ++i) {
        const double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x[static_cast<std::size_t>(i)];
        sum += 0.5 * (hi - lo) * wts[static_cast<std::size_t>(i)] *
               std::hypot(a_ * std::sin(t), b_ * std::cos(t));
      }
    }
    return sum;
  }

  double perimeter() const { return arclength(-kPi, kPi); }

  /// Euclidean distance from an interior point to the boundary.
  double distance_to_boundary(Vec2 p) const {
    if (kind_ == DomainKind::disk) return std::max(0.0, a_ - norm(p));
    auto d2 = [&](double t) {
      const Vec2 q = boundary_point(t) - p;
      return dot(q, q);
    };
    double best_t = 0.0, best = d2(0.0);
    for (int i = 1; i < 128; ++i) {
      const double t = -kPi + 2.0 * kPi * i / 128.0;
      const double v = d2(t);
      if (v < best) {
        best = v;
        best_t = t;
      }
    }
    double t = best_t;
    for (int it = 0; it < 30; ++it) {
      const Vec2 g = boundary_point(t);
      const Vec2 gp = {-a_ * std::sin(t), b_ * std::cos(t)};
      const Vec2 gpp = {-a_ * std::cos(t), -b_ * std::sin(t)};
      const Vec2 r = g - p;
      const double f1 = dot(r, gp);
      const double f2 = dot(gp, gp) + dot(r, gpp);
      if (f2 <= 0.0) break;
      const double step = f1 / f2;
      t -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return std::sqrt(std::min(best, d2(t)));
  }

  /// Smallest s > 0 with rho(p + s e) = 0, for rho(p) < 0.
  double exit_distance(Vec2 p, Vec2 e) const {
    const double A = 0.5 * (e.x * e.x / (a_ * a_) + e.y * e.y / (b_ * b_));
    const double B = p.x * e.x / (a_ * a_) + p.y * e.y / (b_ * b_);
    const double C = rho(p);
    const double disc = std::sqrt(B * B - 4.0 * A * C);
    return B > 0.0 ? -2.0 * C / (B + disc) : (-B + disc) / (2.0 * A);
  }

 private:
  ConvexDomain(DomainKind k, double a, double b) : kind_(k), a_(a), b_(b) {}

  DomainKind kind_;
  double a_, b_;
};

inline BoundaryGeometry boundary_geometry(const ConvexDomain& dom, Vec2 p) {
  const double r = dom.rho(p);
  if (std::abs(r) > 1e-8) {
    throw DomainError("boundary_geometry: point is not on the boundary (rho = " + std::to_string(r) + ")");
  }
  const Vec2 g = dom.grad_rho(p);
  BoundaryGeometry bg{};
  bg.rho = r;
  bg.grad_rho = g;
  bg.hess_rho = dom.hess_rho(p);
  bg.normal = (1.0 / norm(g)) * g;
  bg.curvature = dom.curvature_at_parameter(dom.parameter_of(p));
  return bg;
}

// ---------------------------------------------------------------------------
// Discrete domain.

inline constexpr int kDirections = 8;
/// +x, -x, +y, -y, +(1,1), -(1,1), +(1,-1), -(1,-1); direction d and d^1 are opposite.
inline constexpr std::array<std::array<int, 2>, kDirections> kLatticeDirs = {
    {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}};

struct Neighbor {
  int node = -1;
  double t = 1.0;  // distance in units of the lattice step along the direction
};

/// Differentiation operators, rows = interior nodes, columns = all nodes.
struct Stencils {
  SpMat dx, dy, dxx, dyy, dxy;
};

struct DiscreteDomain {
  ConvexDomain domain = ConvexDomain::disk(1.0);
  double h = 0.0;
  int n_interior = 0;
  std::vector<Vec2> pos;  // interior nodes first, then boundary nodes

  // interior nodes
  std::vector<std::array<int, 2>> lattice;  // integer lattice coordinates
  std::vector<std::array<Neighbor, kDirections>> nbr;
  std::vector<char> regular;     // all eight lattice neighbours are interior
  std::vector<double> dist;      // distance to the boundary
  std::vector<double> weight;    // quadrature weight (clipped cell area)

  // boundary nodes (indexed by node - n_interior)
  std::vector<Vec2> normal;
  std::vector<double> curvature;
  std::vector<double> arc_weight;
  std::vector<double> param;

  Stencils ops;

  int n_nodes() const { return static_cast<int>(pos.size()); }
  int n_boundary() const { return n_nodes() - n_interior; }
  bool is_interior(int k) const { return k < n_interior; }

  /// Interior node at a lattice position, or -1.
  int at_lattice(int i, int j) const {
    auto it = lookup_.find(key(i, j));
    return it == lookup_.end() ? -1 : it->second;
  }

  static std::int64_t key(int i, int j) {
    return (static_cast<std::int64_t>(i) << 32) ^ static_cast<std::uint32_t>(j);
  }

  std::unordered_map<std::int64_t, int> lookup_;
};

namespace detail {

/// Finite-difference weights at x0 for derivatives 0..m on arbitrary points (Fornberg).
inline std::vector<double> fd_weights(std::span<const double> xs, double x0, int m) {
  const int np = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(static_cast<std::size_t>(np), std::vector<double>(static_cast<std::size_t>(m + 1), 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < np; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[static_cast<std::size_t>(i)] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)];
      c2 *= c3;
      auto& ci = c[static_cast<std::size_t>(i)];
      auto& cj = c[static_cast<std::size_t>(j)];
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) {
          ci[static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        }
        ci[0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k) {
        cj[static_cast<std::size_t>(k)] =
            (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
      }
      cj[0] = c4 * cj[0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> out(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) out[static_cast<std::size_t>(i)] = c[static_cast<std::size_t>(i)][static_cast<std::size_t>(m)];
  return out;
}

struct StencilPoint {
  int node;
  double s;  // signed position along the direction in lattice steps
};

/// Points on the lattice line through interior node k along direction pair (dir, dir^1).
/// One-sided 4-point layout when exactly one side is cut short by the boundary.
inline std::vector<StencilPoint> line_points(const DiscreteDomain& dd, int k, int dir, bool second_order_second) {
  const Neighbor& p = dd.nbr[static_cast<std::size_t>(k)][static_cast<std::size_t>(dir)];
  const Neighbor& m = dd.nbr[static_cast<std::size_t>(k)][static_cast<std::size_t>(dir ^ 1)];
  std::vector<StencilPoint> pts = {{m.node, -m.t}, {k, 0.0}, {p.node, p.t}};
  if (!second_order_second) return pts;
  const bool pcut = !dd.is_interior(p.node) && p.t < 1.0;
  const bool mcut = !dd.is_interior(m.node) && m.t < 1.0;
  if (pcut == mcut) return pts;
  if (pcut && dd.is_interior(m.node)) {
    const Neighbor& mm = dd.nbr[static_cast<std::size_t>(m.node)][static_cast<std::size_t>(dir ^ 1)];
    pts.push_back({mm.node, -1.0 - mm.t});
  } else if (mcut && dd.is_interior(p.node)) {
    const Neighbor& pp = dd.nbr[static_cast<std::size_t>(p.node)][static_cast<std::size_t>(dir)];
    pts.push_back({pp.node, 1.0 + pp.t});
  }
  return pts;
}

inline void add_line_derivative(std::vector<Eigen::Triplet<double>>& trip, const DiscreteDomain& dd, int k, int dir,
                                int order, double scale) {
  const auto pts = line_points(dd, k, dir, order == 2);
  std::vector<double> xs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) xs[i] = pts[i].s;
  const auto wts = fd_weights(xs, 0.0, order);
  for (std::size_t i = 0; i < pts.size(); ++i) trip.emplace_back(k, pts[i].node, scale * wts[i]);
}

inline void assemble_stencils(DiscreteDomain& dd) {
  const int ni = dd.n_interior, nn = dd.n_nodes();
  const double h = dd.h;
  std::vector<Eigen::Triplet<double>> tx, ty, txx, tyy, txy;
  for (int k = 0; k < ni; ++k) {
    add_line_derivative(tx, dd, k, 0, 1, 1.0 / h);
    add_line_derivative(ty, dd, k, 2, 1, 1.0 / h);
    add_line_derivative(txx, dd, k, 0, 2, 1.0 / (h * h));
    add_line_derivative(tyy, dd, k, 2, 2, 1.0 / (h * h));
    // u_xy = (D_(1,1) - D_(1,-1)) / 4
    add_line_derivative(txy, dd, k, 4, 2, 0.25 / (h * h));
    add_line_derivative(txy, dd, k, 6, 2, -0.25 / (h * h));
  }
  auto make = [&](SpMat& m, std::vector<Eigen::Triplet<double>>& t) {
    m.resize(ni, nn);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
  };
  make(dd.ops.dx, tx);
  make(dd.ops.dy, ty);
  make(dd.ops.dxx, txx);
  make(dd.ops.dyy, tyy);
  make(dd.ops.dxy, txy);
}

/// Area of the axis-aligned square [c - h/2, c + h/2]^2 inside the domain, by midpoint subsampling.
inline double clipped_cell_area(const ConvexDomain& dom, Vec2 c, double h) {
  const Vec2 corners[4] = {{c.x - h / 2, c.y - h / 2}, {c.x + h / 2, c.y - h / 2},
                           {c.x - h / 2, c.y + h / 2}, {c.x + h / 2, c.y + h / 2}};
  int inside = 0;
  for (const Vec2& q : corners) inside += dom.contains(q) ? 1 : 0;
  if (inside == 4) return h * h;
  constexpr int sub = 24;
  int count = 0;
  for (int i = 0; i < sub; ++i) {
    for (int j = 0; j < sub; ++j) {
      const Vec2 q = {c.x - h / 2 + (i + 0.5) * h / sub, c.y - h / 2 + (j + 0.5) * h / sub};
      count += dom.contains(q) ? 1 : 0;
    }
  }
  return h * h * count / (sub * sub);
}

}  // namespace detail

/// Cut-cell lattice: interior nodes are lattice points with rho < 0, boundary
/// nodes are the crossings of axis and diagonal lattice lines with the boundary.
inline std::shared_ptr<const DiscreteDomain> build_grid(const ConvexDomain& dom, double h) {
  if (!(h > 0.0)) throw GridError("grid spacing must be positive");
  if (h > 0.5 * dom.size()) {
    throw GridError("domain too thin for h = " + std::to_string(h) + " (size " + std::to_string(dom.size()) + ")");
  }
  auto dd = std::make_shared<DiscreteDomain>();
  dd->domain = dom;
  dd->h = h;
  const int imax = static_cast<int>(std::floor(dom.a() / h)) + 1;
  const int jmax = static_cast<int>(std::floor(dom.b() / h)) + 1;

  for (int j = -jmax; j <= jmax; ++j) {
    for (int i = -imax; i <= imax; ++i) {
      const Vec2 p = {i * h, j * h};
      if (dom.contains(p)) {
        dd->lookup_[DiscreteDomain::key(i, j)] = static_cast<int>(dd->pos.size());
        dd->pos.push_back(p);
        dd->lattice.push_back({i, j});
      }
    }
  }
  dd->n_interior = static_cast<int>(dd->pos.size());
  if (dd->n_interior < 5) throw GridError("domain too thin for h: fewer than 5 interior nodes");

  // boundary crossings, merged by position
  std::map<std::pair<std::int64_t, std::int64_t>, int> bkey;
  const double quant = 1e-11 * std::max(dom.a(), dom.b());
  auto boundary_node = [&](Vec2 q) {
    const auto k = std::make_pair(std::llround(q.x / quant), std::llround(q.y / quant));
    auto it = bkey.find(k);
    if (it != bkey.end()) return it->second;
    const int id = static_cast<int>(dd->pos.size());
    dd->pos.push_back(q);
    bkey.emplace(k, id);
    return id;
  };

  dd->nbr.resize(static_cast<std::size_t>(dd->n_interior));
  dd->regular.assign(static_cast<std::size_t>(dd->n_interior), 1);
  for (int k = 0; k < dd->n_interior; ++k) {
    const auto [i, j] = dd->lattice[static_cast<std::size_t>(k)];
    for (int d = 0; d < kDirections; ++d) {
      const auto [di, dj] = kLatticeDirs[static_cast<std::size_t>(d)];
      const int nb = dd->at_lattice(i + di, j + dj);
      Neighbor& e = dd->nbr[static_cast<std::size_t>(k)][static_cast<std::size_t>(d)];
      if (nb >= 0) {
        e = {nb, 1.0};
        continue;
      }
      dd->regular[static_cast<std::size_t>(k)] = 0;
      const Vec2 step = {di * h, dj * h};
      const Vec2 p = dd->pos[static_cast<std::size_t>(k)];
      const double s = std::min(dom.exit_distance(p, step), 1.0);
      Vec2 q = p + s * step;
      e = {boundary_node(q), s};
    }
  }

  const int nb = dd->n_boundary();
  dd->normal.resize(static_cast<std::size_t>(nb));
  dd->curvature.resize(static_cast<std::size_t>(nb));
  dd->param.resize(static_cast<std::size_t>(nb));
  dd->arc_weight.assign(static_cast<std::size_t>(nb), 0.0);
  for (int b = 0; b < nb; ++b) {
    const Vec2 q = dd->pos[static_cast<std::size_t>(dd->n_interior + b)];
    const Vec2 g = dom.grad_rho(q);
    dd->normal[static_cast<std::size_t>(b)] = (1.0 / norm(g)) * g;
    dd->param[static_cast<std::size_t>(b)] = dom.parameter_of(q);
    dd->curvature[static_cast<std::size_t>(b)] = dom.curvature_at_parameter(dd->param[static_cast<std::size_t>(b)]);
  }
  {
    std::vector<int> order(static_cast<std::size_t>(nb));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return dd->param[static_cast<std::size_t>(x)] < dd->param[static_cast<std::size_t>(y)];
    });
    for (int q = 0; q < nb; ++q) {
      const int cur = order[static_cast<std::size_t>(q)];
      const int nxt = order[static_cast<std::size_t>((q + 1) % nb)];
      double t0 = dd->param[static_cast<std::size_t>(cur)], t1 = dd->param[static_cast<std::size_t>(nxt)];
      if (t1 <= t0) t1 += 2.0 * kPi;
      const double len = dom.arclength(t0, t1);
      dd->arc_weight[static_cast<std::size_t>(cur)] += 0.5 * len;
      dd->arc_weight[static_cast<std::size_t>(nxt)] += 0.5 * len;
    }
  }

  dd->dist.resize(static_cast<std::size_t>(dd->n_interior));
  for (int k = 0; k < dd->n_interior; ++k) dd->dist[static_cast<std::size_t>(k)] = dom.distance_to_boundary(dd->pos[static_cast<std::size_t>(k)]);

  // clipped cell areas; cells of exterior lattice points go to the nearest interior node
  dd->weight.assign(static_cast<std::size_t>(dd->n_interior), 0.0);
  for (int k = 0; k < dd->n_interior; ++k) {
    dd->weight[static_cast<std::size_t>(k)] = detail::clipped_cell_area(dom, dd->pos[static_cast<std::size_t>(k)], h);
  }
  for (int j = -jmax - 1; j <= jmax + 1; ++j) {
    for (int i = -imax - 1; i <= imax + 1; ++i) {
      if (dd->at_lattice(i, j) >= 0) continue;
      const Vec2 c = {i * h, j * h};
      if (dom.rho(c) > 2.0 * h / dom.size() + 2.0 * h * h) continue;
      const double area = detail::clipped_cell_area(dom, c, h);
      if (area <= 0.0) continue;
      int best = -1;
      double bd = 1e300;
      for (int r = 1; r <= 3 && best < 0; ++r) {
        for (int dj = -r; dj <= r; ++dj) {
          for (int di = -r; di <= r; ++di) {
            const int id = dd->at_lattice(i + di, j + dj);
            if (id < 0) continue;
            const double dst = di * di + dj * dj;
            if (dst < bd) {
              bd = dst;
              best = id;
            }
          }
        }
      }
      if (best >= 0) dd->weight[static_cast<std::size_t>(best)] += area;
    }
  }

  detail::assemble_stencils(*dd);
  return dd;
}

}  // namespace abreu
