#pragma once

// Batch front end. Exit codes: 0 success, 1 solver failure, 2 usage or configuration error.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "abreu/config.hpp"
#include "abreu/io.hpp"
#include "abreu/legendre.hpp"
#include "abreu/radial.hpp"
#include "abreu/sbvp.hpp"

namespace abreu::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

enum Exit { ok = 0, solver_failure = 1, config_error = 2 };

inline fs::path output_root() {
  if (const char* env = std::getenv("ABREU_OUTPUT_ROOT"); env && *env) return env;
  return fs::current_path();
}

inline fs::path resolve_output(const fs::path& dir) { return dir.is_absolute() ? dir : output_root() / dir; }

inline void write_report(const fs::path& dir, const ordered_json& report) {
  auto out = io::open_out(dir / "report.json");
  out << report.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// JSON views of the library reports.

inline ordered_json to_json(const ConditionResult& c) {
  return {{"verdict", to_string(c.verdict)}, {"log_d", c.log_d}, {"value", c.value}, {"note", c.note}};
}

inline ordered_json to_json(const EstimateCheck& e) {
  return {{"lhs", e.lhs}, {"rhs", e.rhs}, {"slack", e.slack}, {"holds", e.holds}};
}

inline ordered_json to_json(const BoundLedger& l) {
  ordered_json j = {{"integral_det", l.integral_det},
                    {"sup_abs_u", l.sup_abs_u},
                    {"min_det", l.min_det},
                    {"max_det", l.max_det},
                    {"min_w", l.min_w},
                    {"max_w", l.max_w},
                    {"sup_grad", l.sup_grad},
                    {"grad_sup_on_boundary", l.grad_sup_on_boundary},
                    {"abp_constant", l.abp_constant},
                    {"tolerance", l.tolerance},
                    {"abp_upper", to_json(l.abp_upper)},
                    {"abp_lower", to_json(l.abp_lower)},
                    {"abp_dual", to_json(l.abp_dual)},
                    {"aleksandrov", to_json(l.aleksandrov)},
                    {"J", l.J},
                    {"estimates_hold", l.estimates_hold()}};
  double worst_identity = 0.0, max_E = 0.0;
  for (const auto& r : l.traces) {
    worst_identity = std::max(worst_identity, r.identity_residual);
    max_E = std::max(max_E, std::abs(r.E));
  }
  j["boundary_traces"] = {{"count", l.traces.size()}, {"max_abs_E", max_E}, {"max_identity_residual", worst_identity}};
  return j;
}

inline ordered_json to_json(const SolveReport& r) {
  ordered_json j = {{"status", to_string(r.status)},
                    {"message", r.message},
                    {"outer_iterations", r.outer_iterations},
                    {"residual_history", {{"r1", r.r1}, {"r2", r.r2}}},
                    {"damping", r.damping},
                    {"continuation", r.continuation},
                    {"clamped", r.clamped},
                    {"breakdown_node", r.breakdown_node},
                    {"ma_iterations", r.ma_iterations},
                    {"worst_linear_residual", r.worst_linear_residual},
                    {"fixed_point_note", "convergence of the outer iteration is an empirical property, not a theorem"}};
  j["ledger"] = r.ledger ? to_json(*r.ledger) : ordered_json(nullptr);
  return j;
}

inline double max_error(const ScalarField& f, const Sampler& s) {
  double e = 0.0;
  const auto& dd = f.domain();
  for (int k = 0; k < dd.n_nodes(); ++k) {
    const Vec2 p = dd.pos[static_cast<std::size_t>(k)];
    e = std::max(e, std::abs(f[k] - s(p.x, p.y)));
  }
  return e;
}

inline ordered_json describe(const ExperimentConfig& c) {
  return {{"source", c.source.filename().string()},
          {"domain", {{"kind", c.domain.kind}, {"a", c.domain.a}, {"b", c.domain.b}, {"h", c.domain.h}}},
          {"G", {{"kind", c.G.kind}, {"theta", c.G.theta}, {"n", c.G.n}}},
          {"solver", {{"tol", c.solver.tol}, {"max_outer", c.solver.max_outer}, {"damping", c.solver.damping},
                      {"continuation", c.solver.continuation}}}};
}

// ---------------------------------------------------------------------------
// Subcommands.

struct CheckGArgs {
  std::string kind = "power";
  double theta = 0.25;
  int n = 2;
  std::string table;
  double dmin = 1e-8, dmax = 1e8, horizon = 1e12;
  std::string output = "out/check-g";
};

inline int check_g(const CheckGArgs& a) {
  GSpec spec{a.kind, a.theta, a.n, a.table};
  const GFunction G = spec.make();
  const auto grid = log_spaced(a.dmin, a.dmax, 161);
  const auto rep = check_conditions(G, grid, a.horizon);
  std::cout << "G kind=" << to_string(G.kind()) << " theta=" << G.theta() << " n=" << G.n() << "\n";
  std::cout << std::left << std::setw(6) << "cond" << std::setw(14) << "verdict" << std::setw(14) << "witness d"
            << std::setw(14) << "value" << "note\n";
  const std::pair<const char*, const ConditionResult*> rows[] = {{"A1", &rep.a1}, {"A2", &rep.a2}, {"A3", &rep.a3}, {"B2", &rep.b2}};
  ordered_json conds;
  for (const auto& [name, c] : rows) {
    std::cout << std::setw(6) << name << std::setw(14) << to_string(c->verdict) << std::setw(14) << c->d()
              << std::setw(14) << c->value << c->note << "\n";
    conds[name] = to_json(*c);
  }
  const ordered_json report = {{"command", "check-g"},
                               {"G", {{"kind", to_string(G.kind())}, {"theta", G.theta()}, {"n", G.n()}}},
                               {"grid", {{"dmin", a.dmin}, {"dmax", a.dmax}, {"count", 161}, {"horizon", a.horizon}}},
                               {"conditions", conds}};
  write_report(resolve_output(a.output), report);
  return ok;
}

inline DomainPtr build_domain(const ExperimentConfig& c, double h) { return build_grid(c.domain.make(), h); }

inline SBVPProblem make_problem(const ExperimentConfig& c, const DomainPtr& dd) {
  return SBVPProblem(c.G.make(), dd, c.f_field(dd), c.require(c.phi, "phi").sampler(), c.require(c.psi, "psi").sampler(), c.p);
}

inline void emit_field(const fs::path& dir, const std::string& name, const ScalarField& f, bool svg) {
  io::write_field_csv(dir / (name + ".csv"), f);
  if (svg) io::write_contour_svg(dir / (name + ".svg"), f, name);
}

inline int solve(const ExperimentConfig& c, const fs::path& dir) {
  ordered_json report = {{"command", "solve"}, {"config", describe(c)}};
  int code = ok;
  try {
    const auto dd = build_domain(c, c.domain.h);
    const SBVPProblem prob = make_problem(c, dd);
    const auto res = solve_sbvp(prob, c.solver);
    report["nodes"] = {{"interior", dd->n_interior}, {"boundary", dd->n_boundary()}};
    report["result"] = to_json(res.report);
    ordered_json err;
    if (c.exact_u) err["u_max_error"] = max_error(res.u, c.exact_u->sampler());
    if (c.exact_w) err["w_max_error"] = max_error(res.w, c.exact_w->sampler());
    err["h2"] = c.domain.h * c.domain.h;
    report["errors"] = err;
    emit_field(dir, "u", res.u, c.svg);
    emit_field(dir, "w", res.w, c.svg);
    std::cout << "status " << to_string(res.report.status) << " after " << res.report.outer_iterations << " outer iterations\n";
    if (!res.report.r1.empty()) std::cout << "residuals r1=" << res.report.r1.back() << " r2=" << res.report.r2.back() << "\n";
    for (const auto& [k, v] : err.items()) std::cout << k << " " << v.get<double>() << "\n";
    code = res.report.converged() ? ok : solver_failure;
  } catch (const ConfigError&) {
    throw;
  } catch (const GridError&) {
    throw;
  } catch (const std::exception& e) {
    report["result"] = {{"status", "error"}, {"message", e.what()}, {"residual_history", {{"r1", ordered_json::array()}, {"r2", ordered_json::array()}}}};
    std::cerr << "solve failed: " << e.what() << "\n";
    code = solver_failure;
  }
  write_report(dir, report);
  return code;
}

inline int solve_ma_cmd(const ExperimentConfig& c, const fs::path& dir) {
  ordered_json report = {{"command", "solve-ma"}, {"config", describe(c)}};
  const auto dd = build_domain(c, c.domain.h);
  const auto g = ScalarField::sample(dd, c.require(c.g, "g").sampler());
  MAConfig cfg = c.solver.ma;
  const auto res = solve_ma(dd, g, c.require(c.phi, "phi").sampler(), cfg);
  report["result"] = {{"converged", res.report.converged},
                      {"iterations", res.report.iterations},
                      {"residual_history", res.report.residuals},
                      {"steps", res.report.steps},
                      {"min_eigenvalue", res.report.min_eigenvalue},
                      {"worst_linear_residual", res.report.worst_linear_residual},
                      {"rounding_floor", res.report.rounding_floor},
                      {"message", res.report.message}};
  if (c.exact_u) report["errors"] = {{"u_max_error", max_error(res.u, c.exact_u->sampler())}};
  emit_field(dir, "u", res.u, c.svg);
  write_report(dir, report);
  std::cout << (res.report.converged ? "converged" : "not converged") << " in " << res.report.iterations << " Newton steps\n";
  return res.report.converged ? ok : solver_failure;
}

inline int solve_lma_cmd(const ExperimentConfig& c, const fs::path& dir) {
  ordered_json report = {{"command", "solve-lma"}, {"config", describe(c)}};
  const auto dd = build_domain(c, c.domain.h);
  const Expression& coeff = c.coefficient_u ? *c.coefficient_u : c.exact_u ? *c.exact_u : c.require(c.phi, "coefficient_u");
  const auto U = differentiate(ScalarField::sample(dd, coeff.sampler()));
  try {
    const auto res = solve_lma(dd, U, c.f_field(dd), ScalarField::sample(dd, c.require(c.psi, "psi").sampler()));
    report["result"] = {{"ok", res.report.ok},
                        {"min_eigenvalue", res.report.min_eigenvalue},
                        {"linear_residual", res.report.linear_residual},
                        {"residual", res.report.residual},
                        {"diagonally_dominant", res.report.diagonally_dominant},
                        {"sup_w", res.report.sup_w},
                        {"sup_psi", res.report.sup_psi},
                        {"abp_term", res.report.abp_term}};
    if (c.exact_w) report["errors"] = {{"w_max_error", max_error(res.w, c.exact_w->sampler())}};
    emit_field(dir, "w", res.w, c.svg);
    write_report(dir, report);
    std::cout << "residual " << res.report.residual << "\n";
    return res.report.ok ? ok : solver_failure;
  } catch (const EllipticityError& e) {
    report["result"] = {{"ok", false}, {"message", e.what()}, {"worst_node", e.worst_node}, {"min_eigenvalue", e.min_eigenvalue}};
    write_report(dir, report);
    std::cerr << e.what() << "\n";
    return solver_failure;
  }
}

struct RadialArgs {
  std::string which = "ii";
  int n = 2;
  double param = -1.0;
  int points = 4000;
  double rmin = 0.1, rmax = 1.0;
  double p = 0.0;  // 0 selects n/2
  std::vector<double> eps = {1e-1, 1e-2, 1e-3, 1e-4};
  std::string output = "out/verify-radial";
};

inline int verify_radial(const RadialArgs& a) {
  RadialCase rc;
  if (a.which == "i") rc = RadialCase::i;
  else if (a.which == "ii") rc = RadialCase::ii;
  else if (a.which == "iii") rc = RadialCase::iii;
  else throw ConfigError("--case must be i, ii or iii");
  if (!(a.rmin > 0 && a.rmax > a.rmin) || a.points < 5) throw ConfigError("need 0 < rmin < rmax and at least 5 points");
  const auto s = make_case(rc, a.n, a.param);
  const auto op = sample_radial_operator(s, a.rmin, a.rmax, static_cast<std::size_t>(a.points));
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < op.r.size(); ++i) rows.push_back({op.r[i], s.v(op.r[i]), s.W(op.r[i]), op.f[i], op.det[i]});
  const auto dir = resolve_output(a.output);
  io::write_table_csv(dir / "radial.csv", {"r", "u", "w", "f", "det"}, rows);

  const double p = a.p > 0 ? a.p : 0.5 * a.n;
  const auto prof = blowup_profile(s, p, a.eps);
  std::vector<std::vector<double>> brows;
  for (std::size_t i = 0; i < prof.eps.size(); ++i) brows.push_back({prof.eps[i], prof.mass[i]});
  io::write_table_csv(dir / "blowup.csv", {"eps", "mass"}, brows);

  double mean = 0.0;
  for (double f : op.f) mean += f;
  mean /= static_cast<double>(op.f.size());
  const double spread = relative_spread(op.f);
  std::cout << "case " << a.which << " n=" << a.n << " alpha=" << s.alpha() << " theta=" << s.theta() << "\n";
  std::cout << "C1=" << s.C1() << " C2=" << s.C2() << " f exponent=" << s.f_exponent() << "\n";
  std::cout << "mean f=" << mean << " relative spread=" << spread << "\n";
  std::cout << std::left << std::setw(14) << "eps" << "mass\n";
  for (std::size_t i = 0; i < prof.eps.size(); ++i) std::cout << std::setw(14) << prof.eps[i] << prof.mass[i] << "\n";
  std::cout << "slope=" << prof.slope << " shell slope=" << prof.shell_slope << (prof.divergent ? " (divergent)" : " (integrable)") << "\n";

  const ordered_json report = {{"command", "verify-radial"},
                               {"case", a.which},
                               {"n", a.n},
                               {"alpha", s.alpha()},
                               {"theta", s.theta()},
                               {"C1", s.C1()},
                               {"C2", s.C2()},
                               {"C2_check_error", s.C2_check_error()},
                               {"f_exponent", s.f_exponent()},
                               {"points", a.points},
                               {"mean_f", mean},
                               {"relative_spread", spread},
                               {"blowup", {{"p", p}, {"eps", prof.eps}, {"mass", prof.mass}, {"slope", prof.slope},
                                           {"shell_slope", prof.shell_slope}, {"integrand_exponent", prof.integrand_exponent},
                                           {"divergent", prof.divergent}}}};
  write_report(dir, report);
  return ok;
}

inline int legendre_check(const ExperimentConfig& c, const fs::path& dir) {
  ordered_json report = {{"command", "legendre-check"}, {"config", describe(c)}};
  const auto dd = build_domain(c, c.domain.h);
  const Expression& ue = c.require(c.exact_u, "exact_u");
  const auto u = ScalarField::sample(dd, ue.sampler());
  const GFunction G = c.G.make();
  const Sampler f = c.f_sampler();
  std::optional<ScalarField> w;
  if (c.exact_w) w = ScalarField::sample(dd, c.exact_w->sampler());
  std::vector<double> spacing = c.dual_spacing;
  if (spacing.empty()) spacing = {0.5 * c.domain.h};
  std::sort(spacing.begin(), spacing.end(), std::greater<>());

  std::vector<std::vector<double>> rows;
  ordered_json levels = ordered_json::array();
  int code = ok;
  for (double k : spacing) {
    LegendreOptions opt;
    opt.spacing = k;
    if (c.smooth_polish) opt.smooth = ue.sampler();
    try {
      const auto r = dual_equation_residual(u, w, f, G, opt);
      rows.push_back({k, static_cast<double>(r.nodes), r.residual, r.primal_residual});
      levels.push_back({{"spacing", k}, {"nodes", r.nodes}, {"residual", r.residual}, {"primal_residual", r.primal_residual},
                        {"min_dual_det", r.min_dual_det}});
      std::cout << "spacing " << k << " nodes " << r.nodes << " dual residual " << r.residual << "\n";
    } catch (const ResolutionError& e) {
      levels.push_back({{"spacing", k}, {"error", e.what()}});
      std::cerr << e.what() << "\n";
      code = solver_failure;
    }
  }
  io::write_table_csv(dir / "residuals.csv", {"spacing", "nodes", "dual_residual", "primal_residual"}, rows);
  report["levels"] = levels;

  LegendreOptions opt;
  opt.spacing = spacing.back();
  if (c.smooth_polish) opt.smooth = ue.sampler();
  const auto d = legendre_transform(u, opt);
  std::vector<std::vector<double>> drows;
  for (int n = 0; n < d.size(); ++n) {
    const auto s = static_cast<std::size_t>(n);
    const Vec2 y = d.y(n);
    drows.push_back({static_cast<double>(d.col(n)), static_cast<double>(d.row(n)), y.x, y.y, d.value[s],
                     static_cast<double>(d.mask[s]), static_cast<double>(d.depth[s])});
  }
  io::write_table_csv(dir / "dual.csv", {"i", "j", "y1", "y2", "ustar", "mask", "depth"}, drows);
  const double inv = involution_error(u, d);
  report["involution_error"] = inv;
  report["primal_convex"] = d.primal_convex;
  try {
    const auto J = dual_functional(d, f, G);
    report["dual_functional"] = {{"J_star", J.value}, {"energy", J.energy}, {"load", J.load}, {"nodes", J.nodes}};
  } catch (const std::exception& e) {
    report["dual_functional"] = {{"error", e.what()}};
  }
  std::cout << "involution error " << inv << " (3h = " << 3 * c.domain.h << ")\n";
  write_report(dir, report);
  return code;
}

/// Least-squares slope of log e against log h.
inline double observed_order(const std::vector<double>& h, const std::vector<double>& e) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double a = std::log(h[i]), b = std::log(e[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

inline int convergence(const ExperimentConfig& c, const fs::path& dir) {
  ordered_json report = {{"command", "convergence"}, {"config", describe(c)}};
  std::vector<double> levels = c.levels;
  if (levels.empty()) levels = {c.domain.h, c.domain.h / 2};
  std::sort(levels.begin(), levels.end(), std::greater<>());
  std::vector<std::vector<double>> rows;
  std::vector<double> hs, eu, ew;
  ordered_json runs = ordered_json::array();
  int code = ok;
  for (double h : levels) {
    const auto dd = build_domain(c, h);
    const SBVPProblem prob = make_problem(c, dd);
    const auto res = solve_sbvp(prob, c.solver);
    const double e_u = c.exact_u ? max_error(res.u, c.exact_u->sampler()) : std::nan("");
    const double e_w = c.exact_w ? max_error(res.w, c.exact_w->sampler()) : std::nan("");
    const auto& L = res.report.ledger;
    rows.push_back({h, static_cast<double>(res.report.outer_iterations), e_u, e_w,
                    res.report.r1.empty() ? std::nan("") : res.report.r1.back(),
                    res.report.r2.empty() ? std::nan("") : res.report.r2.back(), L ? L->integral_det : std::nan(""),
                    L ? L->sup_abs_u : std::nan(""), L ? L->min_det : std::nan(""), L ? L->max_det : std::nan("")});
    runs.push_back({{"h", h}, {"result", to_json(res.report)}, {"u_max_error", e_u}, {"w_max_error", e_w}});
    std::cout << "h=" << h << " " << to_string(res.report.status) << " it=" << res.report.outer_iterations
              << " eu=" << e_u << " ew=" << e_w << "\n";
    if (!res.report.converged()) code = solver_failure;
    hs.push_back(h), eu.push_back(e_u), ew.push_back(e_w);
  }
  io::write_table_csv(dir / "convergence.csv",
                      {"h", "outer_iterations", "u_error", "w_error", "r1", "r2", "integral_det", "sup_abs_u", "min_det", "max_det"},
                      rows);
  report["runs"] = runs;
  if (hs.size() >= 2 && c.exact_u) {
    report["order_u"] = observed_order(hs, eu);
    std::cout << "observed order (u) " << observed_order(hs, eu) << "\n";
  }
  if (hs.size() >= 2 && c.exact_w) report["order_w"] = observed_order(hs, ew);
  write_report(dir, report);
  return code;
}

/// Flatten a report into dotted keys for the text table and CSV.
inline void flatten(const ordered_json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_array() && !j.empty() && (j.front().is_object() || j.front().is_array())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], prefix + "[" + std::to_string(i) + "]", out);
  } else {
    out.emplace_back(prefix, j.is_string() ? j.get<std::string>() : j.dump());
  }
}

inline int report_cmd(const fs::path& input, const std::string& csv) {
  std::ifstream in(input);
  if (!in) throw ConfigError("cannot read " + input.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw ConfigError(input.string() + ": " + e.what());
  }
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(j, "", rows);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.first.size());
  for (const auto& [k, v] : rows) std::cout << std::left << std::setw(static_cast<int>(width + 2)) << k << v << "\n";
  if (!csv.empty()) {
    auto out = io::open_out(csv);
    out << "key,value\n";
    for (const auto& [k, v] : rows) out << k << ",\"" << v << "\"\n";
  }
  return ok;
}

// ---------------------------------------------------------------------------

inline int run(int argc, char** argv) {
  CLI::App app{"Second boundary value problem solver and verification tools"};
  app.require_subcommand(1);

  CheckGArgs cg;
  auto* c_check = app.add_subcommand("check-g", "Check conditions A1, A2, A3, B2 for a potential G");
  c_check->add_option("--kind", cg.kind, "power | abreu-log | loglog | tabulated")->required();
  c_check->add_option("--theta", cg.theta, "exponent for the power kind");
  c_check->add_option("--n", cg.n, "dimension");
  c_check->add_option("--table", cg.table, "CSV of (d, G) for the tabulated kind");
  c_check->add_option("--dmin", cg.dmin);
  c_check->add_option("--dmax", cg.dmax);
  c_check->add_option("--horizon", cg.horizon);
  c_check->add_option("--output", cg.output, "output directory");

  std::string config_path, output_override;
  std::optional<double> h_override;
  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment TOML")->required();
    sub->add_option("--output", output_override, "output directory");
    sub->add_option("--spacing", h_override, "grid spacing override");
  };
  auto* c_solve = app.add_subcommand("solve", "Solve the coupled fourth-order problem");
  auto* c_ma = app.add_subcommand("solve-ma", "Solve det D^2 u = g with u = phi");
  auto* c_lma = app.add_subcommand("solve-lma", "Solve U^{ij} w_ij = f with w = psi");
  auto* c_leg = app.add_subcommand("legendre-check", "Legendre transform and dual equation residuals");
  auto* c_conv = app.add_subcommand("convergence", "Grid refinement study");
  for (auto* s : {c_solve, c_ma, c_lma, c_leg, c_conv}) add_config(s);

  RadialArgs ra;
  auto* c_rad = app.add_subcommand("verify-radial", "Closed-form radial solutions and blow-up profile");
  c_rad->add_option("--case", ra.which, "i | ii | iii")->required();
  c_rad->add_option("--n", ra.n);
  c_rad->add_option("--param", ra.param, "p for case i, theta otherwise")->required();
  c_rad->add_option("--points", ra.points);
  c_rad->add_option("--p", ra.p, "Sobolev exponent (default n/2)");
  c_rad->add_option("--eps", ra.eps, "decreasing cut-off radii");
  c_rad->add_option("--output", ra.output);

  std::string report_input, report_csv;
  auto* c_rep = app.add_subcommand("report", "Render a report.json as a table");
  c_rep->add_option("input", report_input, "report.json")->required();
  c_rep->add_option("--csv", report_csv, "also write key,value CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    if (code != 0) std::cerr << app.help();
    return code == 0 ? ok : config_error;
  }

  try {
    if (c_check->parsed()) return check_g(cg);
    if (c_rad->parsed()) return verify_radial(ra);
    if (c_rep->parsed()) return report_cmd(report_input, report_csv);

    ExperimentConfig cfg = load_config(config_path);
    if (h_override) cfg.domain.h = *h_override;
    const fs::path dir = resolve_output(output_override.empty() ? cfg.output_dir : fs::path(output_override));
    fs::create_directories(dir);
    if (c_solve->parsed()) return solve(cfg, dir);
    if (c_ma->parsed()) return solve_ma_cmd(cfg, dir);
    if (c_lma->parsed()) return solve_lma_cmd(cfg, dir);
    if (c_leg->parsed()) return legendre_check(cfg, dir);
    if (c_conv->parsed()) return convergence(cfg, dir);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return config_error;
  } catch (const GridError& e) {
    std::cerr << "grid error: " << e.what() << "\n";
    return config_error;
  } catch (const DomainError& e) {
    std::cerr << "invalid parameter: " << e.what() << "\n";
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return solver_failure;
  }
  std::cerr << app.help();
  return config_error;
}

}  // namespace abreu::cli
