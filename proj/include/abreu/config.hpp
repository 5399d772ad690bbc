#pragma once

// Experiment configuration from TOML:
//   [domain]  kind = "disk" | "ellipse", radius, a, b, h
//   [G]       kind = "power" | "abreu-log" | "loglog" | "tabulated", theta, n, table
//   [problem] f, phi, psi, g, exact_u, exact_w, coefficient_u  (expressions) or f_csv
//   [solver]  tol, max_outer, damping, continuation, max_continuation_steps, ma_tolerance, ma_max_iterations, p
//   [convergence] h = [...]
//   [legendre] spacing = [...], polish = "smooth" | "local"
//   [output]  dir, svg

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <toml.hpp>

#include "abreu/expression.hpp"
#include "abreu/geometry.hpp"
#include "abreu/gfun.hpp"
#include "abreu/io.hpp"
#include "abreu/sbvp.hpp"

namespace abreu {

struct DomainSpec {
  std::string kind = "disk";
  double a = 1.0, b = 1.0;
  double h = 1.0 / 32;

  ConvexDomain make() const { return kind == "disk" ? ConvexDomain::disk(a) : ConvexDomain::ellipse(a, b); }
};

struct GSpec {
  std::string kind = "abreu-log";
  double theta = 0.0;
  int n = 2;
  std::filesystem::path table;

  GFunction make() const {
    if (kind == "power") return GFunction::power(theta, n);
    if (kind == "abreu-log" || kind == "log") return GFunction::abreu_log(n);
    if (kind == "loglog") return GFunction::loglog(n);
    if (kind == "tabulated") {
      std::ifstream in(table);
      if (!in) throw ConfigError("cannot read G table " + table.string());
      std::vector<double> d, G;
      std::string line;
      while (std::getline(in, line)) {
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double a, b;
        if (ss >> a >> b) d.push_back(a), G.push_back(b);
      }
      return GFunction::tabulated(std::move(d), std::move(G), n);
    }
    throw ConfigError("unknown G kind '" + kind + "'");
  }
};

struct ExperimentConfig {
  std::filesystem::path source;
  DomainSpec domain;
  GSpec G;
  std::optional<Expression> f, phi, psi, g, exact_u, exact_w, coefficient_u;
  std::optional<std::vector<io::FieldRow>> f_rows;
  SBVPOptions solver;
  double p = 3.0;
  std::vector<double> levels;
  std::vector<double> dual_spacing;
  bool smooth_polish = true;
  std::filesystem::path output_dir = "out";
  bool svg = false;

  Sampler f_sampler() const {
    if (f_rows) return io::csv_sampler(*f_rows);
    if (f) return f->sampler();
    return [](double, double) { return 0.0; };
  }
  ScalarField f_field(const DomainPtr& dd) const {
    if (f_rows) return io::field_from_csv(dd, *f_rows);
    return ScalarField::sample(dd, f_sampler());
  }
  const Expression& require(const std::optional<Expression>& e, const char* key) const {
    if (!e) throw ConfigError(source.string() + ": [problem] " + key + " is required for this command");
    return *e;
  }
};

namespace detail {

template <class T>
T get_or(const toml::table& t, std::string_view section, std::string_view key, T fallback) {
  const auto node = t[section][key];
  if (!node) return fallback;
  if constexpr (std::is_same_v<T, double>) {
    if (auto v = node.value<double>()) return *v;
  } else if constexpr (std::is_same_v<T, int>) {
    if (auto v = node.value<int64_t>()) return static_cast<int>(*v);
  } else if constexpr (std::is_same_v<T, bool>) {
    if (auto v = node.value<bool>()) return *v;
  } else {
    if (auto v = node.value<std::string>()) return *v;
  }
  throw ConfigError("[" + std::string(section) + "] " + std::string(key) + " has the wrong type");
}

inline std::vector<double> get_list(const toml::table& t, std::string_view section, std::string_view key) {
  std::vector<double> out;
  const auto* arr = t[section][key].as_array();
  if (!arr) return out;
  for (const auto& v : *arr) {
    const auto x = v.value<double>();
    if (!x) throw ConfigError("[" + std::string(section) + "] " + std::string(key) + " must hold numbers");
    out.push_back(*x);
  }
  return out;
}

inline std::optional<Expression> get_expr(const toml::table& t, std::string_view key) {
  const auto node = t["problem"][key];
  if (!node) return std::nullopt;
  if (auto s = node.value<std::string>()) return Expression::parse(*s);
  if (auto v = node.value<double>()) return Expression::parse(io::num(*v));
  throw ConfigError("[problem] " + std::string(key) + " must be an expression string or a number");
}

}  // namespace detail

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  toml::table t;
  try {
    t = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ConfigError(path.string() + ": " + std::string(e.description()));
  }
  const auto base = path.parent_path();
  ExperimentConfig c;
  c.source = path;

  c.domain.kind = detail::get_or<std::string>(t, "domain", "kind", "disk");
  if (c.domain.kind == "disk") {
    c.domain.a = c.domain.b = detail::get_or(t, "domain", "radius", 1.0);
  } else if (c.domain.kind == "ellipse") {
    c.domain.a = detail::get_or(t, "domain", "a", 1.0);
    c.domain.b = detail::get_or(t, "domain", "b", 1.0);
  } else {
    throw ConfigError("[domain] kind must be disk or ellipse");
  }
  c.domain.h = detail::get_or(t, "domain", "h", 1.0 / 32);
  if (!(c.domain.a > 0 && c.domain.b > 0 && c.domain.h > 0)) throw ConfigError("[domain] sizes and h must be positive");

  c.G.kind = detail::get_or<std::string>(t, "G", "kind", "abreu-log");
  c.G.theta = detail::get_or(t, "G", "theta", 0.0);
  c.G.n = detail::get_or(t, "G", "n", 2);
  if (auto tab = t["G"]["table"].value<std::string>()) c.G.table = base / *tab;
  if (c.G.kind == "tabulated" && !std::filesystem::exists(c.G.table)) {
    throw ConfigError("[G] table file not found: " + c.G.table.string());
  }

  c.f = detail::get_expr(t, "f");
  c.phi = detail::get_expr(t, "phi");
  c.psi = detail::get_expr(t, "psi");
  c.g = detail::get_expr(t, "g");
  c.exact_u = detail::get_expr(t, "exact_u");
  c.exact_w = detail::get_expr(t, "exact_w");
  c.coefficient_u = detail::get_expr(t, "coefficient_u");
  if (auto csv = t["problem"]["f_csv"].value<std::string>()) {
    const auto p = base / *csv;
    if (!std::filesystem::exists(p)) throw ConfigError("[problem] f_csv file not found: " + p.string());
    c.f_rows = io::read_field_csv(p);
  }
  if (c.psi) {
    // positivity of psi on the boundary curve
    const auto dom = c.domain.make();
    for (int i = 0; i < 720; ++i) {
      const Vec2 q = dom.boundary_point(2 * kPi * i / 720);
      const double v = (*c.psi)(q.x, q.y);
      if (!(v > 0)) {
        throw ConfigError("[problem] psi must be positive on the boundary; psi(" + io::num(q.x) + ", " + io::num(q.y) +
                          ") = " + io::num(v));
      }
    }
  }

  c.solver.tol = detail::get_or(t, "solver", "tol", c.solver.tol);
  c.solver.max_outer = detail::get_or(t, "solver", "max_outer", c.solver.max_outer);
  c.solver.damping = detail::get_or(t, "solver", "damping", c.solver.damping);
  c.solver.continuation = detail::get_or(t, "solver", "continuation", c.solver.continuation);
  c.solver.max_continuation_steps = detail::get_or(t, "solver", "max_continuation_steps", c.solver.max_continuation_steps);
  c.solver.ma.tolerance = detail::get_or(t, "solver", "ma_tolerance", c.solver.ma.tolerance);
  c.solver.ma.max_iterations = detail::get_or(t, "solver", "ma_max_iterations", c.solver.ma.max_iterations);
  c.p = detail::get_or(t, "solver", "p", c.p);
  if (!(c.solver.damping > 0 && c.solver.damping <= 1)) throw ConfigError("[solver] damping must lie in (0, 1]");

  c.levels = detail::get_list(t, "convergence", "h");
  c.dual_spacing = detail::get_list(t, "legendre", "spacing");
  const auto polish = detail::get_or<std::string>(t, "legendre", "polish", "smooth");
  if (polish != "smooth" && polish != "local") throw ConfigError("[legendre] polish must be smooth or local");
  c.smooth_polish = polish == "smooth";

  c.output_dir = detail::get_or<std::string>(t, "output", "dir", "out/" + path.stem().string());
  c.svg = detail::get_or(t, "output", "svg", false);
  return c;
}

}  // namespace abreu
