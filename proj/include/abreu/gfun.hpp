#pragma once

// Concave potentials G and the structural conditions A1, A2, A3, B2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "abreu/errors.hpp"

namespace abreu {

enum class GKind { power, abreu_log, loglog, tabulated };

inline const char* to_string(GKind k) {
  switch (k) {
    case GKind::power: return "power";
    case GKind::abreu_log: return "abreu-log";
    case GKind::loglog: return "loglog";
    case GKind::tabulated: return "tabulated";
  }
  return "?";
}

struct GBundle {
  double G;
  double w;      // G'(d)
  double wp;     // G''(d)
  double wstar;  // G(d) - d G'(d)
};

/// Values at t = log d: G, a = d w(d), b = d^2 w'(d). Lets every kind be
/// evaluated far beyond the range of representable d.
struct LogSample {
  double G;
  double a;
  double b;
};

class GFunction {
 public:
  /// G(d) = (d^theta - 1)/theta; theta == 0 is the logarithm.
  static GFunction power(double theta, int n) {
    check_dimension(n);
    if (!(theta < 1.0 / n)) {
      throw DomainError("power G requires theta < 1/n (theta = " + std::to_string(theta) +
                        ", n = " + std::to_string(n) + ")");
    }
    if (theta == 0.0) return abreu_log(n);
    GFunction g;
    g.kind_ = GKind::power;
    g.theta_ = theta;
    g.n_ = n;
    return g;
  }

  /// G(d) = log d (Abreu's equation).
  static GFunction abreu_log(int n) {
    check_dimension(n);
    GFunction g;
    g.kind_ = GKind::abreu_log;
    g.n_ = n;
    return g;
  }

  /// G(d) = log d / log log(d + exp(exp(4n))), evaluated in log domain.
  static GFunction loglog(int n) {
    check_dimension(n);
    GFunction g;
    g.kind_ = GKind::loglog;
    g.n_ = n;
    g.shift_log_ = std::exp(4.0 * n);
    return g;
  }

  /// Monotone cubic interpolant through sorted (d, G) samples; no extrapolation.
  static GFunction tabulated(std::vector<double> d, std::vector<double> G, int n) {
    check_dimension(n);
    if (d.size() != G.size() || d.size() < 4) {
      throw DomainError("tabulated G needs at least 4 (d, G) samples of equal length");
    }
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(d[i] > 0.0)) throw DomainError("tabulated G: d samples must be positive");
      if (i > 0 && !(d[i] > d[i - 1])) throw DomainError("tabulated G: d samples must be strictly ascending");
      if (i > 0 && !(G[i] > G[i - 1])) throw DomainError("tabulated G: G must be strictly increasing (w > 0)");
    }
    GFunction g;
    g.kind_ = GKind::tabulated;
    g.n_ = n;
    g.td_ = std::move(d);
    g.tG_ = std::move(G);
    g.build_slopes();
    return g;
  }

  GKind kind() const { return kind_; }
  double theta() const { return theta_; }
  int n() const { return n_; }
  const std::vector<double>& table_d() const { return td_; }

  /// Admissible d interval (open for closed-form kinds).
  std::pair<double, double> d_range() const {
    if (kind_ == GKind::tabulated) return {td_.front(), td_.back()};
    return {0.0, std::numeric_limits<double>::infinity()};
  }

  /// Range (inf, sup) of w over the admissible d interval.
  std::pair<double, double> w_range() const {
    if (kind_ == GKind::tabulated) return {w(td_.back()), w(td_.front())};
    return {0.0, std::numeric_limits<double>::infinity()};
  }

  double G(double d) const { return eval(d).G; }
  double w(double d) const { return eval(d).w; }
  double wp(double d) const { return eval(d).wp; }
  double wstar(double d) const { return eval(d).wstar; }

  GBundle eval(double d) const {
    if (!(d > 0.0)) throw DomainError("G evaluated at nonpositive d = " + std::to_string(d));
    GBundle r{};
    switch (kind_) {
      case GKind::power: {
        const double th = theta_;
        const double p = std::pow(d, th);
        r.G = (p - 1.0) / th;
        r.w = std::pow(d, th - 1.0);
        r.wp = (th - 1.0) * std::pow(d, th - 2.0);
        break;
      }
      case GKind::abreu_log:
        r.G = std::log(d);
        r.w = 1.0 / d;
        r.wp = -1.0 / (d * d);
        break;
      case GKind::loglog: {
        const LogSample s = at_log(std::log(d));
        r.G = s.G;
        r.w = s.a / d;
        r.wp = s.b / (d * d);
        break;
      }
      case GKind::tabulated: {
        if (d < td_.front() || d > td_.back()) {
          throw RangeError("tabulated G evaluated outside its table at d = " + std::to_string(d),
                           td_.front(), td_.back());
        }
        hermite(d, r.G, r.w, r.wp);
        break;
      }
    }
    r.wstar = r.G - d * r.w;
    return r;
  }

  LogSample at_log(double t) const {
    switch (kind_) {
      case GKind::power: {
        const double e = std::exp(theta_ * t);
        return {std::expm1(theta_ * t) / theta_, e, (theta_ - 1.0) * e};
      }
      case GKind::abreu_log:
        return {t, 1.0, -1.0};
      case GKind::loglog:
        return loglog_at(t);
      case GKind::tabulated: {
        const double d = std::exp(t);
        const GBundle b = eval(d);
        return {b.G, d * b.w, d * d * b.wp};
      }
    }
    return {};
  }

  /// d with w(d) = s.
  double invert_w(double s) const {
    if (!(s > 0.0)) {
      throw RangeError("invert_w: s = " + std::to_string(s) + " outside the range of w", 0.0,
                       std::numeric_limits<double>::infinity());
    }
    switch (kind_) {
      case GKind::power:
        return std::pow(s, 1.0 / (theta_ - 1.0));
      case GKind::abreu_log:
        return 1.0 / s;
      case GKind::loglog:
        return invert_loglog(s);
      case GKind::tabulated:
        return invert_tabulated(s);
    }
    return 0.0;
  }

 private:
  GFunction() = default;

  static void check_dimension(int n) {
    if (n < 2) throw DomainError("dimension n must be >= 2");
  }

  LogSample loglog_at(double t) const {
    const double s = shift_log_;
    // ell = log(d + e^{e^{4n}}) = logaddexp(t, s)
    const double ell = std::max(t, s) + std::log1p(std::exp(-std::abs(t - s)));
    const double sig = t - s >= 0.0 ? 1.0 / (1.0 + std::exp(s - t))
                                    : std::exp(t - s) / (1.0 + std::exp(t - s));
    const double L = std::log(ell);
    const double L2 = L * L;
    const double G = t / L;
    const double B = t * sig / (ell * L2);
    const double a = 1.0 / L - B;
    const double dB = (sig + t * sig * (1.0 - sig)) / (ell * L2) - t * sig * sig / (ell * ell * L2) -
                      2.0 * t * sig * sig / (ell * ell * L2 * L);
    const double da = -sig / (ell * L2) - dB;
    return {G, a, da - a};
  }

  double invert_loglog(double s) const {
    // log w(t) = -t + log a(t) is strictly decreasing in t.
    const double target = std::log(s);
    auto f = [&](double t) { return -t + std::log(loglog_at(t).a) - target; };
    double lo = -745.0, hi = 709.0;
    if (f(lo) < 0.0 || f(hi) > 0.0) {
      throw RangeError("invert_w: s outside the representable range of w", w(std::exp(hi)),
                       w(std::exp(lo)));
    }
    double t = std::clamp(-target, lo, hi);
    for (int it = 0; it < 200; ++it) {
      const double ft = f(t);
      if (ft > 0.0) lo = t; else hi = t;
      const LogSample ls = loglog_at(t);
      // d/dt log w = -1 + a'/a = b/a
      const double slope = ls.b / ls.a;
      double next = t - ft / slope;
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) {
        t = next;
        break;
      }
      t = next;
    }
    return std::exp(t);
  }

  double invert_tabulated(double s) const {
    const auto [wlo, whi] = w_range();
    if (s < wlo || s > whi) {
      throw RangeError("invert_w: s = " + std::to_string(s) + " outside the tabulated range of w", wlo, whi);
    }
    double lo = td_.front(), hi = td_.back();
    double d = 0.5 * (lo + hi);
    for (int it = 0; it < 300; ++it) {
      const GBundle b = eval(d);
      const double r = b.w - s;
      if (std::abs(r) <= 1e-13 * s) break;
      if (r > 0.0) lo = d; else hi = d;
      double next = b.wp < 0.0 ? d - r / b.wp : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (hi - lo <= 1e-16 * hi) { d = next; break; }
      d = next;
    }
    return d;
  }

  // Fritsch-Carlson monotone slopes.
  void build_slopes() {
    const std::size_t m = td_.size();
    std::vector<double> delta(m - 1);
    for (std::size_t i = 0; i + 1 < m; ++i) delta[i] = (tG_[i + 1] - tG_[i]) / (td_[i + 1] - td_[i]);
    slope_.assign(m, 0.0);
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) s = 0.0;
      else if (d0 * d1 <= 0.0 && std::abs(s) > 3.0 * std::abs(d0)) s = 3.0 * d0;
      return s;
    };
    slope_[0] = end_slope(td_[1] - td_[0], td_[2] - td_[1], delta[0], delta[1]);
    slope_[m - 1] = end_slope(td_[m - 1] - td_[m - 2], td_[m - 2] - td_[m - 3], delta[m - 2], delta[m - 3]);
    for (std::size_t i = 1; i + 1 < m; ++i) {
      if (delta[i - 1] * delta[i] <= 0.0) {
        slope_[i] = 0.0;
      } else {
        const double h0 = td_[i] - td_[i - 1], h1 = td_[i + 1] - td_[i];
        const double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
        slope_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
      }
    }
  }

  void hermite(double d, double& G, double& dG, double& d2G) const {
    auto it = std::upper_bound(td_.begin(), td_.end(), d);
    std::size_t i = it == td_.begin() ? 0 : static_cast<std::size_t>(it - td_.begin()) - 1;
    if (i >= td_.size() - 1) i = td_.size() - 2;
    const double h = td_[i + 1] - td_[i];
    const double s = (d - td_[i]) / h;
    const double y0 = tG_[i], y1 = tG_[i + 1];
    const double m0 = slope_[i] * h, m1 = slope_[i + 1] * h;
    const double s2 = s * s, s3 = s2 * s;
    G = (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * m1;
    dG = ((6 * s2 - 6 * s) * y0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * y1 + (3 * s2 - 2 * s) * m1) / h;
    d2G = ((12 * s - 6) * y0 + (6 * s - 4) * m0 + (-12 * s + 6) * y1 + (6 * s - 2) * m1) / (h * h);
  }

  GKind kind_ = GKind::abreu_log;
  double theta_ = 0.0;
  int n_ = 2;
  double shift_log_ = 0.0;
  std::vector<double> td_, tG_, slope_;
};

// ---------------------------------------------------------------------------
// Structural conditions.

enum class Verdict { pass, fail, inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Outcome of one condition with the point that decided it. The point is
/// stored as log d so witnesses beyond the double range stay representable.
struct ConditionResult {
  Verdict verdict = Verdict::inconclusive;
  double log_d = 0.0;
  double value = 0.0;
  std::string note;

  double d() const { return std::exp(log_d); }
  bool passed() const { return verdict == Verdict::pass; }
};

struct ConditionReport {
  ConditionResult a1;  // w' + (1 - 1/n) w/d <= 0, value reported as d^2 w' + (1 - 1/n) d w
  ConditionResult a2;  // d w >= c > 0 for d >= 1, value = c (inf over samples or limit)
  ConditionResult a3;  // d^{1-1/n} w -> infinity as d -> 0
  ConditionResult b2;  // G(d) - d G'(d) -> infinity as d -> infinity
};

/// Log-spaced samples including both ends.
inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  return v;
}

namespace detail {

/// Three-point ratio test on successive increments of a sequence sampled at
/// log-spaced horizons.  Returns +1 divergent, -1 convergent, 0 undecided;
/// `limit` receives the geometric extrapolation when convergent.
inline int divergence_trend(double q1, double q2, double q3, double& limit) {
  const double d1 = q2 - q1, d2 = q3 - q2;
  limit = q3;
  if (d1 > 0.0 && d2 > 0.0) {
    const double r = d2 / d1;
    if (r >= 0.95) return 1;
    if (r <= 0.8) {
      limit = q3 + d2 * r / (1.0 - r);
      return -1;
    }
    return 0;
  }
  if (d2 <= 0.0) return -1;
  return 0;
}

}  // namespace detail

inline ConditionReport check_conditions(const GFunction& g, std::span<const double> d_grid,
                                        double limit_horizon) {
  ConditionReport rep;
  const int n = g.n();
  const double k = 1.0 - 1.0 / n;
  const auto [dmin, dmax] = g.d_range();
  const bool tab = g.kind() == GKind::tabulated;

  // A1, pointwise.
  {
    double worst = -std::numeric_limits<double>::infinity();
    double worst_t = 0.0;
    bool outside = false;
    auto visit = [&](double t) {
      const LogSample s = g.at_log(t);
      const double m = s.b + k * s.a;
      if (m > worst) {
        worst = m;
        worst_t = t;
      }
    };
    for (double d : d_grid) {
      if (tab && (d < dmin || d > dmax)) {
        outside = true;
        continue;
      }
      visit(std::log(d));
    }
    if (g.kind() == GKind::loglog) {
      // the transition of log log(d + e^{e^{4n}}) sits at log d ~ e^{4n}
      for (double t : log_spaced(1.0, 1e8, 400)) visit(t);
    }
    rep.a1.log_d = worst_t;
    rep.a1.value = worst;
    if (worst > 1e-12 * std::max(1.0, std::abs(g.at_log(worst_t).a))) {
      rep.a1.verdict = Verdict::fail;
      rep.a1.note = "violated at sampled point";
    } else if (outside) {
      rep.a1.verdict = Verdict::inconclusive;
      rep.a1.note = "holds on the table; part of the grid lies outside the tabulated range";
    } else {
      rep.a1.verdict = Verdict::pass;
      rep.a1.note = "max over samples";
    }
  }

  // A2: inf_{d >= 1} d w.
  {
    double c = std::numeric_limits<double>::infinity();
    double ct = 0.0;
    for (double d : d_grid) {
      if (d < 1.0 || (tab && (d < dmin || d > dmax))) continue;
      const double a = g.at_log(std::log(d)).a;
      if (a < c) {
        c = a;
        ct = std::log(d);
      }
    }
    ConditionResult& r = rep.a2;
    r.log_d = ct;
    r.value = c;
    switch (g.kind()) {
      case GKind::power:
        if (g.theta() > 0.0) {
          r.verdict = Verdict::pass;
          r.note = "d w = d^theta is nondecreasing";
          r.value = std::min(c, 1.0);
        } else {
          r.verdict = Verdict::fail;
          r.log_d = std::log(limit_horizon);
          r.value = g.at_log(r.log_d).a;
          r.note = "d w = d^theta -> 0 as d -> infinity";
        }
        break;
      case GKind::abreu_log:
        r.verdict = Verdict::pass;
        r.value = 1.0;
        r.note = "d w = 1";
        break;
      case GKind::loglog: {
        r.verdict = Verdict::fail;
        r.log_d = 1e12;
        r.value = g.at_log(r.log_d).a;
        r.note = "d w ~ 1/log log d -> 0 as d -> infinity";
        break;
      }
      case GKind::tabulated: {
        if (dmax < 1.0) {
          r.verdict = Verdict::inconclusive;
          r.note = "table does not reach d >= 1";
          break;
        }
        if (c <= 0.0) {
          r.verdict = Verdict::fail;
          r.note = "d w <= 0 at sampled point";
          break;
        }
        const double t3 = std::log(std::min(limit_horizon, dmax));
        const double t0 = std::max(0.0, std::log(dmin));
        const double step = (t3 - t0) / 2.0;
        if (!(step > 0.0)) {
          r.verdict = Verdict::inconclusive;
          r.note = "no room for a trend test";
          break;
        }
        const double q1 = g.at_log(t3 - 2 * step).a, q2 = g.at_log(t3 - step).a, q3 = g.at_log(t3).a;
        if (q3 >= q2 && q2 >= q1) {
          r.verdict = Verdict::pass;
          r.value = std::min(c, q1);
          r.note = "d w nondecreasing toward the horizon";
        } else {
          const double d1 = q2 - q1, d2 = q3 - q2;
          const double ratio = d1 != 0.0 ? d2 / d1 : 1.0;
          if (ratio > 0.0 && ratio < 1.0) {
            const double lim = q3 + d2 * ratio / (1.0 - ratio);
            r.value = std::min(c, lim);
            r.log_d = t3;
            r.verdict = lim > 0.0 ? Verdict::pass : Verdict::fail;
            r.note = "geometric extrapolation of d w";
          } else {
            r.verdict = Verdict::fail;
            r.log_d = t3;
            r.value = q3;
            r.note = "d w decreasing without deceleration";
          }
        }
        break;
      }
    }
  }

  // A3: d^{1-1/n} w = a e^{-t/n} -> infinity as t -> -infinity.
  {
    ConditionResult& r = rep.a3;
    double dsmall = std::numeric_limits<double>::infinity();
    for (double d : d_grid) dsmall = std::min(dsmall, d);
    if (tab) dsmall = std::max(dsmall, dmin);
    const double ts = std::log(dsmall);
    auto q = [&](double t) { return g.at_log(t).a * std::exp(-t / n); };
    r.log_d = ts;
    r.value = q(ts);
    switch (g.kind()) {
      case GKind::power:
        r.verdict = Verdict::pass;
        r.note = "d^{theta - 1/n} with theta < 1/n";
        break;
      case GKind::abreu_log:
        r.verdict = Verdict::pass;
        r.note = "d^{-1/n}";
        break;
      case GKind::loglog:
        r.verdict = Verdict::pass;
        r.note = "d w -> 1/(4n) as d -> 0";
        break;
      case GKind::tabulated: {
        const double t1 = std::log(dmin);
        const double span = std::min(std::log(10.0), (std::log(dmax) - t1) / 4.0);
        double lim = 0.0;
        // horizons approaching the small end of the table
        const int trend = detail::divergence_trend(q(t1 + 2 * span), q(t1 + span), q(t1), lim);
        r.log_d = t1;
        r.value = q(t1);
        if (trend > 0) {
          r.verdict = Verdict::pass;
          r.note = "non-decaying growth toward the table start";
        } else if (trend < 0) {
          r.verdict = Verdict::inconclusive;
          r.note = "growth decays toward the table start; data ends before d -> 0";
        } else {
          r.verdict = Verdict::inconclusive;
          r.note = "trend undecided near the table start";
        }
        break;
      }
    }
  }

  // B2: G - d w -> infinity.
  {
    ConditionResult& r = rep.b2;
    const double th = std::log(tab ? std::min(limit_horizon, dmax) : limit_horizon);
    auto q = [&](double t) {
      const LogSample s = g.at_log(t);
      return s.G - s.a;
    };
    r.log_d = th;
    r.value = q(th);
    switch (g.kind()) {
      case GKind::power:
        if (g.theta() > 0.0) {
          r.verdict = Verdict::pass;
          r.note = "d^theta (1/theta - 1) - 1/theta -> infinity";
        } else {
          r.verdict = Verdict::fail;
          r.note = "bounded: G - d w -> -1/theta";
          r.value = -1.0 / g.theta();
        }
        break;
      case GKind::abreu_log:
        r.verdict = Verdict::pass;
        r.note = "log d - 1";
        break;
      case GKind::loglog:
        r.verdict = Verdict::pass;
        r.note = "log d / log log d -> infinity";
        break;
      case GKind::tabulated: {
        const double t0 = std::log(dmin);
        const double span = std::min(std::log(10.0), (th - t0) / 4.0);
        double lim = 0.0;
        const int trend = detail::divergence_trend(q(th - 2 * span), q(th - span), q(th), lim);
        if (trend > 0) {
          r.verdict = Verdict::pass;
          r.note = "non-decaying growth toward the horizon";
        } else if (trend < 0) {
          r.verdict = Verdict::fail;
          r.value = lim;
          r.note = "increments decay geometrically; extrapolated limit is finite";
        } else {
          r.verdict = Verdict::inconclusive;
          r.note = "trend undecided at the horizon";
        }
        break;
      }
    }
  }
  return rep;
}

}  // namespace abreu
