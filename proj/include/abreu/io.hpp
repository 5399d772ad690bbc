#pragma once

// Field CSV (node_id,x,y,value), plain tables, and contour SVG output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "abreu/discrete_ops.hpp"
#include "abreu/errors.hpp"

namespace abreu::io {

/// Shortest round-trip representation, independent of locale.
inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

inline void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  auto out = open_out(path);
  out << "node_id,x,y,value\n";
  const auto& dd = f.domain();
  for (int k = 0; k < dd.n_nodes(); ++k) {
    const Vec2 p = dd.pos[static_cast<std::size_t>(k)];
    out << k << ',' << num(p.x) << ',' << num(p.y) << ',' << num(f[k]) << '\n';
  }
}

inline void write_table_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
    out << '\n';
  }
}

struct FieldRow {
  int id;
  Vec2 p;
  double value;
};

inline std::vector<FieldRow> read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read field file " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("node_id,x,y,value", 0) != 0) throw ConfigError(path.string() + ": expected header node_id,x,y,value");
  std::vector<FieldRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    FieldRow r{};
    if (!(ss >> r.id >> r.p.x >> r.p.y >> r.value)) {
      throw ConfigError(path.string() + ": malformed row at line " + std::to_string(lineno));
    }
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError(path.string() + ": no data rows");
  return rows;
}

/// Sampler over scattered CSV rows: bilinear on lattice cells whose four corners are
/// present, nearest row otherwise.
inline Sampler csv_sampler(const std::vector<FieldRow>& rows) {
  // lattice columns hold many rows; boundary abscissae rarely repeat
  std::map<long long, int> column;
  for (const auto& r : rows) ++column[std::llround(r.p.x * 1e9)];
  std::vector<double> xs;
  for (const auto& [key, count] : column) {
    if (count >= 3) xs.push_back(static_cast<double>(key) * 1e-9);
  }
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < xs.size(); ++i) h = std::min(h, xs[i] - xs[i - 1]);
  if (!std::isfinite(h)) h = 1.0;
  auto lattice = std::make_shared<std::map<std::pair<long, long>, double>>();
  for (const auto& r : rows) {
    const double a = r.p.x / h, b = r.p.y / h;
    if (std::abs(a - std::round(a)) < 1e-6 && std::abs(b - std::round(b)) < 1e-6) {
      (*lattice)[{std::lround(a), std::lround(b)}] = r.value;
    }
  }
  auto all = std::make_shared<std::vector<FieldRow>>(rows);
  return [h, lattice, all](double x, double y) {
    const double a = x / h, b = y / h;
    const long i = static_cast<long>(std::floor(a)), j = static_cast<long>(std::floor(b));
    const double s = a - i, t = b - j;
    double c[4];
    bool ok = true;
    const long ci[4][2] = {{i, j}, {i + 1, j}, {i, j + 1}, {i + 1, j + 1}};
    for (int q = 0; q < 4 && ok; ++q) {
      auto it = lattice->find({ci[q][0], ci[q][1]});
      if (it == lattice->end()) ok = false;
      else c[q] = it->second;
    }
    if (ok) return (1 - t) * ((1 - s) * c[0] + s * c[1]) + t * ((1 - s) * c[2] + s * c[3]);
    const FieldRow* best = &all->front();
    double bd = std::numeric_limits<double>::infinity();
    for (const auto& r : *all) {
      const double d = std::hypot(r.p.x - x, r.p.y - y);
      if (d < bd) bd = d, best = &r;
    }
    return best->value;
  };
}

/// Field on a grid from CSV rows keyed by node_id; positions must match the grid.
inline ScalarField field_from_csv(const DomainPtr& dd, const std::vector<FieldRow>& rows) {
  if (static_cast<int>(rows.size()) != dd->n_nodes()) {
    const auto s = csv_sampler(rows);
    return ScalarField::sample(dd, s);
  }
  ScalarField f = ScalarField::constant(dd, 0.0);
  for (const auto& r : rows) {
    if (r.id < 0 || r.id >= dd->n_nodes() || norm(dd->pos[static_cast<std::size_t>(r.id)] - r.p) > 1e-9) {
      return ScalarField::sample(dd, csv_sampler(rows));
    }
    f[r.id] = r.value;
  }
  return f;
}

/// Ten-level linear contour map by marching squares over full lattice cells.
inline void write_contour_svg(const std::filesystem::path& path, const ScalarField& f, const std::string& title) {
  const auto& dd = f.domain();
  const double a = dd.domain.a(), b = dd.domain.b();
  const double scale = 400.0 / std::max(a, b), pad = 20.0;
  const double W = 2 * a * scale + 2 * pad, H = 2 * b * scale + 2 * pad;
  auto X = [&](double x) { return num(std::round((pad + (x + a) * scale) * 100) / 100); };
  auto Y = [&](double y) { return num(std::round((pad + (b - y) * scale) * 100) / 100); };

  const double lo = f.values().minCoeff(), hi = f.values().maxCoeff();
  auto out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(W) << "\" height=\"" << num(H + 20) << "\">\n";
  out << "<text x=\"" << num(pad) << "\" y=\"" << num(H + 12) << "\" font-size=\"12\">" << title << " [" << num(lo)
      << ", " << num(hi) << "]</text>\n";
  out << "<ellipse cx=\"" << X(0) << "\" cy=\"" << Y(0) << "\" rx=\"" << num(a * scale) << "\" ry=\"" << num(b * scale)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (!(hi > lo)) {
    out << "</svg>\n";
    return;
  }
  const double h = dd.h;
  for (int level = 0; level < 10; ++level) {
    const double c = lo + (level + 0.5) * (hi - lo) / 10.0;
    const int shade = 40 + 20 * level;
    out << "<path stroke=\"rgb(" << shade << ",0," << 255 - shade << ")\" fill=\"none\" d=\"";
    for (int k = 0; k < dd.n_interior; ++k) {
      const auto [i, j] = dd.lattice[static_cast<std::size_t>(k)];
      const int q[4] = {k, dd.at_lattice(i + 1, j), dd.at_lattice(i + 1, j + 1), dd.at_lattice(i, j + 1)};
      if (q[1] < 0 || q[2] < 0 || q[3] < 0) continue;
      const Vec2 corner[4] = {{i * h, j * h}, {(i + 1) * h, j * h}, {(i + 1) * h, (j + 1) * h}, {i * h, (j + 1) * h}};
      double v[4];
      int mask = 0;
      for (int e = 0; e < 4; ++e) {
        v[e] = f[q[e]];
        if (v[e] > c) mask |= 1 << e;
      }
      if (mask == 0 || mask == 15) continue;
      std::vector<Vec2> cuts;
      for (int e = 0; e < 4; ++e) {
        const int n = (e + 1) % 4;
        if (((mask >> e) & 1) != ((mask >> n) & 1)) {
          const double t = (c - v[e]) / (v[n] - v[e]);
          cuts.push_back(corner[e] + t * (corner[n] - corner[e]));
        }
      }
      for (std::size_t s = 0; s + 1 < cuts.size(); s += 2) {
        out << 'M' << X(cuts[s].x) << ' ' << Y(cuts[s].y) << 'L' << X(cuts[s + 1].x) << ' ' << Y(cuts[s + 1].y);
      }
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace abreu::io
