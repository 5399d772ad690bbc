#pragma once

// Grid fields and finite-difference operators on a DiscreteDomain.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "abreu/errors.hpp"
#include "abreu/geometry.hpp"
#include "abreu/types.hpp"

namespace abreu {

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

/// One value per node (interior first, then boundary).
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(DomainPtr dd, Eigen::VectorXd values) : dd_(std::move(dd)), v_(std::move(values)) {
    if (v_.size() != dd_->n_nodes()) throw DomainError("field size does not match node count");
  }

  static ScalarField constant(DomainPtr dd, double c) {
    const int n = dd->n_nodes();
    return {std::move(dd), Eigen::VectorXd::Constant(n, c)};
  }

  static ScalarField sample(DomainPtr dd, const Sampler& s) {
    Eigen::VectorXd v(dd->n_nodes());
    for (int k = 0; k < dd->n_nodes(); ++k) v[k] = s(dd->pos[static_cast<std::size_t>(k)].x, dd->pos[static_cast<std::size_t>(k)].y);
    return {std::move(dd), std::move(v)};
  }

  const DiscreteDomain& domain() const { return *dd_; }
  const DomainPtr& domain_ptr() const { return dd_; }
  const Eigen::VectorXd& values() const { return v_; }
  Eigen::VectorXd& values() { return v_; }
  int size() const { return static_cast<int>(v_.size()); }

  double operator[](int k) const { return v_[k]; }
  double& operator[](int k) { return v_[k]; }

  auto interior() const { return v_.head(dd_->n_interior); }
  auto boundary() const { return v_.tail(dd_->n_boundary()); }

  bool all_finite() const { return v_.allFinite(); }

  /// Replace boundary values by a sampler.
  void set_boundary(const Sampler& s) {
    for (int k = dd_->n_interior; k < dd_->n_nodes(); ++k) {
      const Vec2 p = dd_->pos[static_cast<std::size_t>(k)];
      v_[k] = s(p.x, p.y);
    }
  }

  friend ScalarField operator-(const ScalarField& a, const ScalarField& b) { return {a.dd_, a.v_ - b.v_}; }
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b) { return {a.dd_, a.v_ + b.v_}; }
  friend ScalarField operator*(double s, const ScalarField& a) { return {a.dd_, s * a.v_}; }

 private:
  DomainPtr dd_;
  Eigen::VectorXd v_;
};

/// Derivative data at interior nodes.
struct TensorField {
  DomainPtr dd;
  std::vector<Vec2> grad;
  std::vector<Sym2> hess;
  std::vector<double> det;
  std::vector<Sym2> cof;

  int size() const { return static_cast<int>(cof.size()); }

  /// Constant coefficient field with the given cofactor.
  static TensorField constant(DomainPtr dd, const Sym2& cofactor) {
    TensorField t;
    const auto n = static_cast<std::size_t>(dd->n_interior);
    t.dd = std::move(dd);
    t.grad.assign(n, Vec2{});
    t.cof.assign(n, cofactor);
    t.hess.assign(n, cofactor.cofactor());
    t.det.assign(n, cofactor.det());
    return t;
  }
};

inline TensorField differentiate(const ScalarField& u) {
  const auto& dd = u.domain();
  const auto& v = u.values();
  const Eigen::VectorXd ux = dd.ops.dx * v, uy = dd.ops.dy * v;
  const Eigen::VectorXd uxx = dd.ops.dxx * v, uyy = dd.ops.dyy * v, uxy = dd.ops.dxy * v;
  TensorField t;
  t.dd = u.domain_ptr();
  const auto n = static_cast<std::size_t>(dd.n_interior);
  t.grad.resize(n);
  t.hess.resize(n);
  t.det.resize(n);
  t.cof.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    t.grad[k] = {ux[i], uy[i]};
    t.hess[k] = {uxx[i], uxy[i], uyy[i]};
    t.det[k] = t.hess[k].det();
    t.cof[k] = t.hess[k].cofactor();
  }
  return t;
}

/// Sparse matrix of w -> a11 w_xx + 2 a12 w_xy + a22 w_yy (interior rows, all columns).
inline SpMat nondivergence_operator(const DiscreteDomain& dd, std::span<const Sym2> a) {
  Eigen::VectorXd a11(dd.n_interior), a12(dd.n_interior), a22(dd.n_interior);
  for (int k = 0; k < dd.n_interior; ++k) {
    a11[k] = a[static_cast<std::size_t>(k)].xx;
    a12[k] = 2.0 * a[static_cast<std::size_t>(k)].xy;
    a22[k] = a[static_cast<std::size_t>(k)].yy;
  }
  SpMat m = a11.asDiagonal() * dd.ops.dxx;
  m += a12.asDiagonal() * dd.ops.dxy;
  m += a22.asDiagonal() * dd.ops.dyy;
  m.makeCompressed();
  return m;
}

/// Regular node whose eight neighbours are regular as well.
inline bool is_deep(const DiscreteDomain& dd, int k) {
  if (!dd.regular[static_cast<std::size_t>(k)]) return false;
  for (const auto& e : dd.nbr[static_cast<std::size_t>(k)]) {
    if (!dd.regular[static_cast<std::size_t>(e.node)]) return false;
  }
  return true;
}

/// Conservative form d_i(a^{ij} d_j w) on deep nodes, nondivergence form elsewhere.
inline SpMat divergence_operator(const DiscreteDomain& dd, std::span<const Sym2> a) {
  const SpMat nd = nondivergence_operator(dd, a);
  const double ih2 = 1.0 / (dd.h * dd.h);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<char> deep(static_cast<std::size_t>(dd.n_interior));
  for (int k = 0; k < dd.n_interior; ++k) deep[static_cast<std::size_t>(k)] = is_deep(dd, k);
  for (int k = 0; k < dd.n_interior; ++k) {
    const auto& nb = dd.nbr[static_cast<std::size_t>(k)];
    if (!deep[static_cast<std::size_t>(k)]) continue;
    const Sym2& c = a[static_cast<std::size_t>(k)];
    auto coef = [&](int d) -> const Sym2& { return a[static_cast<std::size_t>(nb[static_cast<std::size_t>(d)].node)]; };
    // d_x (a11 d_x w) and d_y (a22 d_y w) with midpoint averages
    const double e = 0.5 * (c.xx + coef(0).xx), wv = 0.5 * (c.xx + coef(1).xx);
    const double n = 0.5 * (c.yy + coef(2).yy), s = 0.5 * (c.yy + coef(3).yy);
    trip.emplace_back(k, nb[0].node, e * ih2);
    trip.emplace_back(k, nb[1].node, wv * ih2);
    trip.emplace_back(k, nb[2].node, n * ih2);
    trip.emplace_back(k, nb[3].node, s * ih2);
    trip.emplace_back(k, k, -(e + wv + n + s) * ih2);
    // d_x (a12 d_y w) + d_y (a12 d_x w)
    const int ne = nb[4].node, sw = nb[5].node, se = nb[6].node, nw = nb[7].node;
    const double q = 0.25 * ih2;
    const double ae = coef(0).xy, aw = coef(1).xy, an = coef(2).xy, as = coef(3).xy;
    trip.emplace_back(k, ne, q * (ae + an));
    trip.emplace_back(k, se, -q * (ae + as));
    trip.emplace_back(k, nw, -q * (aw + an));
    trip.emplace_back(k, sw, q * (aw + as));
  }
  SpMat dv(dd.n_interior, dd.n_nodes());
  dv.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd keep(dd.n_interior);
  for (int k = 0; k < dd.n_interior; ++k) keep[k] = deep[static_cast<std::size_t>(k)] ? 0.0 : 1.0;
  SpMat out = keep.asDiagonal() * nd;
  out += dv;
  out.makeCompressed();
  return out;
}

/// Pointwise U^{ij} w_ij at interior nodes; boundary entries are zero.
inline ScalarField apply_L(const TensorField& U, const ScalarField& w) {
  const auto& dd = w.domain();
  const SpMat L = nondivergence_operator(dd, U.cof);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dd.n_nodes());
  out.head(dd.n_interior) = L * w.values();
  return {w.domain_ptr(), std::move(out)};
}

// ---------------------------------------------------------------------------
// Norms and quadrature.

/// Area integral over the interior cell weights.
inline double integrate(const ScalarField& f) {
  const auto& dd = f.domain();
  double s = 0.0;
  for (int k = 0; k < dd.n_interior; ++k) s += dd.weight[static_cast<std::size_t>(k)] * f[k];
  return s;
}

/// Arclength integral over boundary nodes.
inline double boundary_integral(const ScalarField& f) {
  const auto& dd = f.domain();
  double s = 0.0;
  for (int b = 0; b < dd.n_boundary(); ++b) s += dd.arc_weight[static_cast<std::size_t>(b)] * f[dd.n_interior + b];
  return s;
}

/// L^p norm by node quadrature; p = infinity gives the max over all nodes.
inline double lp_norm(const ScalarField& f, double p) {
  if (std::isinf(p)) return f.values().cwiseAbs().maxCoeff();
  const auto& dd = f.domain();
  double s = 0.0;
  for (int k = 0; k < dd.n_interior; ++k) s += dd.weight[static_cast<std::size_t>(k)] * std::pow(std::abs(f[k]), p);
  return std::pow(s, 1.0 / p);
}

inline double max_abs_interior(const ScalarField& f) {
  return f.domain().n_interior == 0 ? 0.0 : f.interior().cwiseAbs().maxCoeff();
}

/// Max |d_i U^{ij}| over deep nodes.
inline double cofactor_divergence(const TensorField& U) {
  const auto& dd = *U.dd;
  double worst = 0.0;
  for (int k = 0; k < dd.n_interior; ++k) {
    const auto& nb = dd.nbr[static_cast<std::size_t>(k)];
    if (!is_deep(dd, k)) continue;
    auto c = [&](int d) -> const Sym2& { return U.cof[static_cast<std::size_t>(nb[static_cast<std::size_t>(d)].node)]; };
    const double h2 = 2.0 * dd.h;
    const double d1 = (c(0).xx - c(1).xx) / h2 + (c(2).xy - c(3).xy) / h2;
    const double d2 = (c(0).xy - c(1).xy) / h2 + (c(2).yy - c(3).yy) / h2;
    worst = std::max({worst, std::abs(d1), std::abs(d2)});
  }
  return worst;
}

/// Integral of |D^4 u|^p over {|x| > eps}, using full 5x5 lattice blocks.
inline double sobolev4_mass(const ScalarField& u, double p, double eps) {
  const auto& dd = u.domain();
  const double h = dd.h;
  if (eps < 4.0 * h) throw ResolutionError("sobolev4_mass needs eps >= 4h");
  static constexpr double d4[5] = {1, -4, 6, -4, 1};
  static constexpr double d3[5] = {-0.5, 1, 0, -1, 0.5};
  static constexpr double d2[5] = {0, 1, -2, 1, 0};
  static constexpr double d1[5] = {0, -0.5, 0, 0.5, 0};
  static constexpr double d0[5] = {0, 0, 1, 0, 0};
  const double h4 = h * h * h * h;
  double mass = 0.0;
  double block[5][5];
  for (int k = 0; k < dd.n_interior; ++k) {
    const Vec2 x = dd.pos[static_cast<std::size_t>(k)];
    if (norm(x) <= eps) continue;
    const auto [i0, j0] = dd.lattice[static_cast<std::size_t>(k)];
    bool full = true;
    for (int a = 0; a < 5 && full; ++a) {
      for (int b = 0; b < 5; ++b) {
        const int id = dd.at_lattice(i0 + a - 2, j0 + b - 2);
        if (id < 0) {
          full = false;
          break;
        }
        block[a][b] = u[id];
      }
    }
    if (!full) continue;
    auto apply = [&](const double* sx, const double* sy) {
      double s = 0.0;
      for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) s += sx[a] * sy[b] * block[a][b];
      return s / h4;
    };
    const double xxxx = apply(d4, d0), xxxy = apply(d3, d1), xxyy = apply(d2, d2), xyyy = apply(d1, d3),
                 yyyy = apply(d0, d4);
    const double mag = std::sqrt(xxxx * xxxx + 4 * xxxy * xxxy + 6 * xxyy * xxyy + 4 * xyyy * xyyy + yyyy * yyyy);
    mass += dd.weight[static_cast<std::size_t>(k)] * std::pow(mag, p);
  }
  return mass;
}

// ---------------------------------------------------------------------------
// Boundary jets.

struct Jet {
  Vec2 grad;
  Sym2 hess;
};

/// Gradient and Hessian at every boundary node from a weighted least-squares
/// quadratic through the node value and the nodes within 3h.
inline std::vector<Jet> boundary_jets(const ScalarField& u) {
  const auto& dd = u.domain();
  const double h = dd.h;
  const double radius = 3.0 * h;
  std::unordered_map<std::int64_t, std::vector<int>> buckets;
  for (int b = dd.n_interior; b < dd.n_nodes(); ++b) {
    const Vec2 p = dd.pos[static_cast<std::size_t>(b)];
    buckets[DiscreteDomain::key(static_cast<int>(std::floor(p.x / h)), static_cast<int>(std::floor(p.y / h)))].push_back(b);
  }
  std::vector<Jet> out(static_cast<std::size_t>(dd.n_boundary()));
  std::vector<int> nbrs;
  for (int b = dd.n_interior; b < dd.n_nodes(); ++b) {
    const Vec2 p = dd.pos[static_cast<std::size_t>(b)];
    const int ci = static_cast<int>(std::floor(p.x / h)), cj = static_cast<int>(std::floor(p.y / h));
    nbrs.clear();
    for (int i = ci - 3; i <= ci + 4; ++i) {
      for (int j = cj - 3; j <= cj + 4; ++j) {
        const int id = dd.at_lattice(i, j);
        if (id >= 0 && norm(dd.pos[static_cast<std::size_t>(id)] - p) <= radius) nbrs.push_back(id);
        auto it = buckets.find(DiscreteDomain::key(i, j));
        if (it == buckets.end()) continue;
        for (int q : it->second) {
          if (q != b && norm(dd.pos[static_cast<std::size_t>(q)] - p) <= radius) nbrs.push_back(q);
        }
      }
    }
    Eigen::MatrixXd A(static_cast<Eigen::Index>(nbrs.size()), 5);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(nbrs.size()));
    for (std::size_t r = 0; r < nbrs.size(); ++r) {
      const Vec2 d = dd.pos[static_cast<std::size_t>(nbrs[r])] - p;
      const double wt = 1.0 / (norm(d) / h + 0.25);
      const auto i = static_cast<Eigen::Index>(r);
      A.row(i) << d.x / h, d.y / h, 0.5 * d.x * d.x / (h * h), d.x * d.y / (h * h), 0.5 * d.y * d.y / (h * h);
      A.row(i) *= wt;
      rhs[i] = wt * (u[nbrs[r]] - u[b]);
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(rhs);
    out[static_cast<std::size_t>(b - dd.n_interior)] = {{c[0] / h, c[1] / h}, {c[2] / (h * h), c[3] / (h * h), c[4] / (h * h)}};
  }
  return out;
}

/// Gradient at every node: stencils inside, least-squares jets on the boundary.
inline std::vector<Vec2> node_gradients(const ScalarField& u, const TensorField& t) {
  const auto& dd = u.domain();
  std::vector<Vec2> g(t.grad);
  const auto jets = boundary_jets(u);
  g.reserve(static_cast<std::size_t>(dd.n_nodes()));
  for (const auto& j : jets) g.push_back(j.grad);
  return g;
}

}  // namespace abreu
