#pragma once

// Legacy ASCII VTK snapshots and the load-displacement CSV.

#include "common.hpp"
#include "mesh.hpp"
#include "solver.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace hhofrac {

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Polygonal unstructured grid with named scalar cell arrays.
struct VtkData {
  std::string title = "hhofrac";
  std::vector<Point> points;
  std::vector<std::vector<Index>> cells;
  /// Written in insertion order.
  std::vector<std::pair<std::string, std::vector<double>>> cell_arrays;

  const std::vector<double>* array(const std::string& name) const {
    for (const auto& [n, v] : cell_arrays)
      if (n == name) return &v;
    return nullptr;
  }
};

inline std::string format_vtk(const VtkData& d) {
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n" << d.title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << d.points.size() << " double\n";
  for (const Point& p : d.points) out << format_double(p.x()) << ' ' << format_double(p.y()) << " 0\n";
  std::size_t total = 0;
  for (const auto& c : d.cells) total += c.size() + 1;
  out << "CELLS " << d.cells.size() << ' ' << total << '\n';
  for (const auto& c : d.cells) {
    out << c.size();
    for (Index v : c) out << ' ' << v;
    out << '\n';
  }
  out << "CELL_TYPES " << d.cells.size() << '\n';
  for (std::size_t i = 0; i < d.cells.size(); ++i) out << "7\n";
  if (!d.cell_arrays.empty()) out << "CELL_DATA " << d.cells.size() << '\n';
  for (const auto& [name, values] : d.cell_arrays) {
    if (values.size() != d.cells.size()) throw IoError("cell array '" + name + "' has the wrong length");
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (double v : values) out << format_double(v) << '\n';
  }
  return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

inline void write_vtk(const VtkData& d, const std::string& path) { write_text_file(path, format_vtk(d)); }

/// Reads files produced by `format_vtk`.
inline VtkData parse_vtk(const std::string& text) {
  std::istringstream in(text);
  auto fail = [](const std::string& what) { return IoError("VTK parse error: " + what); };
  std::string line;
  VtkData d;
  if (!std::getline(in, line) || line.rfind("# vtk DataFile", 0) != 0) throw fail("missing header");
  if (!std::getline(in, d.title)) throw fail("missing title");
  std::string word;
  if (!(in >> word) || word != "ASCII") throw fail("only ASCII files are supported");
  if (!(in >> word >> line) || word != "DATASET" || line != "UNSTRUCTURED_GRID") throw fail("expected an unstructured grid");
  std::size_t n = 0, total = 0;
  if (!(in >> word >> n >> line) || word != "POINTS") throw fail("expected POINTS");
  d.points.resize(n);
  for (auto& p : d.points) {
    std::string x, y, z;
    if (!(in >> x >> y >> z)) throw fail("truncated POINTS");
    p = Point(std::stod(x), std::stod(y));
  }
  if (!(in >> word >> n >> total) || word != "CELLS") throw fail("expected CELLS");
  d.cells.resize(n);
  for (auto& c : d.cells) {
    std::size_t k = 0;
    if (!(in >> k)) throw fail("truncated CELLS");
    c.resize(k);
    for (auto& v : c)
      if (!(in >> v)) throw fail("truncated CELLS");
  }
  if (!(in >> word >> n) || word != "CELL_TYPES" || n != d.cells.size()) throw fail("expected CELL_TYPES");
  for (std::size_t i = 0; i < n; ++i) {
    int t = 0;
    if (!(in >> t) || t != 7) throw fail("only polygon cells are supported");
  }
  if (!(in >> word)) return d;
  if (word != "CELL_DATA" || !(in >> n) || n != d.cells.size()) throw fail("expected CELL_DATA");
  while (in >> word) {
    std::string name, type, lookup, table;
    int comps = 0;
    if (word != "SCALARS" || !(in >> name >> type >> comps >> lookup >> table) || comps != 1)
      throw fail("expected a scalar array");
    std::vector<double> values(n);
    for (auto& v : values) {
      std::string tok;
      if (!(in >> tok)) throw fail("truncated array '" + name + "'");
      v = std::stod(tok);
    }
    d.cell_arrays.emplace_back(name, std::move(values));
  }
  return d;
}

inline VtkData read_vtk(const std::string& path) { return parse_vtk(read_text_file(path)); }

/// Snapshot with cell arrays phi (cell unknown), H (cell mean of the
/// history) and umag (magnitude of the cell mean of the displacement
/// reconstruction; the reconstruction and the cell unknown share their mean,
/// which for centred monomials is the constant coefficient).
inline VtkData make_snapshot(const FractureProblem& problem, const StateFields& state) {
  const Mesh& mesh = problem.mesh();
  VtkData d;
  d.points = mesh.vertices();
  d.cells.reserve(mesh.num_cells());
  std::vector<double> phi(mesh.num_cells()), h(mesh.num_cells()), umag(mesh.num_cells());
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
    const auto c = static_cast<Index>(i);
    d.cells.push_back(mesh.cell(c).vertices);
    phi[i] = state.phase[c];
    h[i] = state.history.mean(problem.history_geometry(), c);
    const Index off = problem.dofs().cell_offset(c);
    umag[i] = Vector2(state.displacement[off], state.displacement[off + 3]).norm();
  }
  d.cell_arrays = {{"phi", phi}, {"H", h}, {"umag", umag}};
  return d;
}

// ---------------------------------------------------------------------------
// Load-displacement table
// ---------------------------------------------------------------------------

struct LoadRow {
  int step = 0;
  double time = 0.;
  double load = 0.;
  Vector2 force = Vector2::Zero();
  double force_average = 0.;
  int iterations = 0;
  double wall_time = 0.;

  double force_magnitude() const { return force.norm(); }
};

inline const char* csv_header() { return "step,time,load,Fx,Fy,F,F_average,iterations,wall_time"; }

inline std::string format_csv_row(const LoadRow& r) {
  std::ostringstream out;
  out << r.step << ',' << format_double(r.time) << ',' << format_double(r.load) << ',' << format_double(r.force.x())
      << ',' << format_double(r.force.y()) << ',' << format_double(r.force_magnitude()) << ','
      << format_double(r.force_average) << ',' << r.iterations << ',' << format_double(r.wall_time);
  return out.str();
}

inline LoadRow parse_csv_row(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> f;
  std::string tok;
  while (std::getline(in, tok, ',')) f.push_back(tok);
  if (f.size() != 9) throw IoError("malformed CSV row '" + line + "'");
  try {
    LoadRow r;
    r.step = std::stoi(f[0]);
    r.time = std::stod(f[1]);
    r.load = std::stod(f[2]);
    r.force = Vector2(std::stod(f[3]), std::stod(f[4]));
    r.force_average = std::stod(f[6]);
    r.iterations = std::stoi(f[7]);
    r.wall_time = std::stod(f[8]);
    return r;
  } catch (const std::exception&) {
    throw IoError("malformed CSV row '" + line + "'");
  }
}

inline std::vector<LoadRow> read_csv(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != csv_header()) throw IoError("unexpected CSV header in '" + path + "'");
  std::vector<LoadRow> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(parse_csv_row(line));
  return rows;
}

} // namespace hhofrac
