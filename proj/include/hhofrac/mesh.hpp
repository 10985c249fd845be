#pragma once

// Polygonal mesh: vertices, counter-clockwise cells, straight faces with
// boundary markers, derived geometry, ASCII I/O, and notch cutting.

#include "common.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hhofrac {

namespace marker {
inline constexpr int none = 0;
inline constexpr int left = 1;
inline constexpr int right = 2;
inline constexpr int bottom = 3;
inline constexpr int top = 4;
inline constexpr int notch = 100;
} // namespace marker

struct BoundaryEdge {
  Index a = 0;
  Index b = 0;
  int marker = marker::none;
};

struct Face {
  std::array<Index, 2> vertices{};
  /// Adjacent cells; `cells[1] == -1` on the boundary.
  std::array<Index, 2> cells{-1, -1};
  int marker = marker::none;
  double measure = 0.;
  Point midpoint = Point::Zero();
  /// Unit vector from `vertices[0]` to `vertices[1]`.
  Vector2 tangent = Vector2::Zero();
  /// Unit normal obtained by rotating the tangent clockwise.
  Vector2 normal = Vector2::Zero();

  bool is_boundary() const { return cells[1] < 0; }
  double diameter() const { return measure; }
};

struct Cell {
  std::vector<Index> vertices;
  /// Faces in local order: face i joins vertices i and i+1.
  std::vector<Index> faces;
  /// +1 when the face normal points out of the cell, -1 otherwise.
  std::vector<int> orientations;
  double measure = 0.;
  Point centroid = Point::Zero();
  double diameter = 0.;

  std::size_t num_faces() const { return faces.size(); }
};

/// Immutable polygonal mesh with all derived geometry populated.
class Mesh {
public:
  Mesh() = default;

  /// Builds faces and geometry from CCW cells. Boundary edges not listed in
  /// `boundary` get marker 0.
  Mesh(std::vector<Point> vertices, std::vector<std::vector<Index>> cells,
       const std::vector<BoundaryEdge>& boundary)
      : vertices_(std::move(vertices)) {
    cells_.reserve(cells.size());
    for (auto& c : cells) {
      Cell cell;
      cell.vertices = std::move(c);
      cells_.push_back(std::move(cell));
    }
    build_topology(boundary);
    build_geometry();
  }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_cells() const { return cells_.size(); }
  std::size_t num_faces() const { return faces_.size(); }

  const Point& vertex(Index i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const Cell& cell(Index i) const { return cells_[static_cast<std::size_t>(i)]; }
  const Face& face(Index i) const { return faces_[static_cast<std::size_t>(i)]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Cell>& cells() const { return cells_; }
  const std::vector<Face>& faces() const { return faces_; }

  /// Unit normal to the `local`-th face of `cell`, pointing out of the cell.
  Vector2 normal(Index cell, std::size_t local) const {
    const Cell& c = this->cell(cell);
    return static_cast<double>(c.orientations[local]) * face(c.faces[local]).normal;
  }

  /// Local position of `face` in `cell`, or -1.
  Index local_face_index(Index cell, Index face) const {
    const auto& fs = this->cell(cell).faces;
    auto it = std::find(fs.begin(), fs.end(), face);
    return it == fs.end() ? -1 : static_cast<Index>(it - fs.begin());
  }

  std::size_t num_boundary_faces() const {
    return static_cast<std::size_t>(
        std::count_if(faces_.begin(), faces_.end(), [](const Face& f) { return f.is_boundary(); }));
  }

  double boundary_measure() const {
    double m = 0.;
    for (const auto& f : faces_)
      if (f.is_boundary()) m += f.measure;
    return m;
  }

  /// Boundary edges with their markers, in face order.
  std::vector<BoundaryEdge> boundary_edges() const {
    std::vector<BoundaryEdge> out;
    for (const auto& f : faces_)
      if (f.is_boundary()) out.push_back({f.vertices[0], f.vertices[1], f.marker});
    return out;
  }

  /// Largest cell diameter.
  double max_diameter() const {
    double h = 0.;
    for (const auto& c : cells_) h = std::max(h, c.diameter);
    return h;
  }

  double min_diameter() const {
    double h = std::numeric_limits<double>::max();
    for (const auto& c : cells_) h = std::min(h, c.diameter);
    return h;
  }

private:
  void build_topology(const std::vector<BoundaryEdge>& boundary) {
    const auto nv = static_cast<Index>(vertices_.size());
    std::map<std::pair<Index, Index>, Index> edge_to_face;
    for (std::size_t ic = 0; ic < cells_.size(); ++ic) {
      Cell& c = cells_[ic];
      const std::size_t k = c.vertices.size();
      if (k < 3) throw MeshError("cell " + std::to_string(ic) + " has fewer than 3 vertices");
      for (Index v : c.vertices)
        if (v < 0 || v >= nv)
          throw MeshError("cell " + std::to_string(ic) + " references dangling vertex " +
                          std::to_string(v));
      c.faces.resize(k);
      c.orientations.resize(k);
      for (std::size_t i = 0; i < k; ++i) {
        const Index a = c.vertices[i];
        const Index b = c.vertices[(i + 1) % k];
        if (a == b) throw MeshError("cell " + std::to_string(ic) + " has a repeated vertex");
        const auto key = std::minmax(a, b);
        auto [it, inserted] = edge_to_face.try_emplace({key.first, key.second}, 0);
        if (inserted) {
          it->second = static_cast<Index>(faces_.size());
          Face f;
          f.vertices = {a, b};
          f.cells = {static_cast<Index>(ic), -1};
          faces_.push_back(f);
          c.orientations[i] = 1;
        } else {
          Face& f = faces_[static_cast<std::size_t>(it->second)];
          if (f.cells[1] >= 0)
            throw MeshError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                            ") shared by more than two cells");
          if (f.vertices[0] == a)
            throw MeshError("cells " + std::to_string(f.cells[0]) + " and " + std::to_string(ic) +
                            " traverse a shared edge in the same direction (orientation mismatch)");
          f.cells[1] = static_cast<Index>(ic);
          c.orientations[i] = -1;
        }
        c.faces[i] = it->second;
      }
    }
    for (const auto& e : boundary) {
      const auto key = std::minmax(e.a, e.b);
      auto it = edge_to_face.find({key.first, key.second});
      if (it == edge_to_face.end())
        throw MeshError("boundary entry (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                        ") is not a mesh edge");
      Face& f = faces_[static_cast<std::size_t>(it->second)];
      if (!f.is_boundary())
        throw MeshError("boundary entry (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                        ") is an internal edge");
      f.marker = e.marker;
    }
  }

  void build_geometry() {
    for (auto& f : faces_) {
      const Point& a = vertex(f.vertices[0]);
      const Point& b = vertex(f.vertices[1]);
      f.measure = (b - a).norm();
      if (!(f.measure > 0.)) throw MeshError("zero-length face");
      f.midpoint = 0.5 * (a + b);
      f.tangent = (b - a) / f.measure;
      f.normal = Vector2(f.tangent.y(), -f.tangent.x());
    }
    for (std::size_t ic = 0; ic < cells_.size(); ++ic) {
      Cell& c = cells_[ic];
      const std::size_t k = c.vertices.size();
      // Shoelace area and centroid, relative to the first vertex for accuracy.
      const Point& o = vertex(c.vertices[0]);
      double area2 = 0.;
      Point g = Point::Zero();
      for (std::size_t i = 1; i + 1 < k; ++i) {
        const Vector2 p = vertex(c.vertices[i]) - o;
        const Vector2 q = vertex(c.vertices[i + 1]) - o;
        const double a = cross(p, q);
        area2 += a;
        g += a * (p + q);
      }
      if (!(area2 > 0.))
        throw MeshError("cell " + std::to_string(ic) + " is clockwise or degenerate (signed area " +
                        std::to_string(0.5 * area2) + ")");
      c.measure = 0.5 * area2;
      c.centroid = o + g / (3. * area2);
      c.diameter = 0.;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
          c.diameter = std::max(c.diameter, (vertex(c.vertices[i]) - vertex(c.vertices[j])).norm());
      // Quadrature sub-triangulates by a fan from the centroid.
      for (std::size_t i = 0; i < k; ++i) {
        const Vector2 p = vertex(c.vertices[i]) - c.centroid;
        const Vector2 q = vertex(c.vertices[(i + 1) % k]) - c.centroid;
        if (!(cross(p, q) > 1e-14 * c.diameter * c.diameter))
          throw MeshError("cell " + std::to_string(ic) +
                          " is not star-shaped with respect to its centroid");
      }
    }
  }

  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<Face> faces_;
};

// ---------------------------------------------------------------------------
// ASCII format:
//   nv nc
//   x y            (nv lines)
//   k v1 ... vk    (nc lines, 0-based, CCW)
//   nb
//   va vb marker   (nb lines)
// ---------------------------------------------------------------------------

inline Mesh parse_mesh(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& what) -> MeshError { return MeshError("mesh parse error: " + what); };
  long long nv = 0, nc = 0;
  if (!(in >> nv >> nc)) throw fail("missing header 'nv nc'");
  if (nv < 3 || nc < 1) throw fail("invalid counts in header");
  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices)
    if (!(in >> p.x() >> p.y())) throw fail("truncated vertex block");
  std::vector<std::vector<Index>> cells(static_cast<std::size_t>(nc));
  for (auto& c : cells) {
    long long k = 0;
    if (!(in >> k) || k < 3) throw fail("invalid cell vertex count");
    c.resize(static_cast<std::size_t>(k));
    for (auto& v : c) {
      long long idx = 0;
      if (!(in >> idx)) throw fail("truncated cell block");
      if (idx < 0 || idx >= nv) throw fail("dangling vertex index " + std::to_string(idx));
      v = static_cast<Index>(idx);
    }
  }
  long long nb = 0;
  if (!(in >> nb) || nb < 0) throw fail("missing boundary count");
  std::vector<BoundaryEdge> boundary(static_cast<std::size_t>(nb));
  for (auto& e : boundary) {
    long long a = 0, b = 0;
    if (!(in >> a >> b >> e.marker)) throw fail("truncated boundary block");
    if (a < 0 || a >= nv || b < 0 || b >= nv) throw fail("dangling vertex index in boundary block");
    e.a = static_cast<Index>(a);
    e.b = static_cast<Index>(b);
  }
  std::string extra;
  if (in >> extra) throw fail("trailing content '" + extra + "'");
  return Mesh(std::move(vertices), std::move(cells), boundary);
}

inline std::string format_mesh(const Mesh& mesh) {
  std::ostringstream out;
  out.precision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
  for (const auto& p : mesh.vertices()) out << p.x() << ' ' << p.y() << '\n';
  for (const auto& c : mesh.cells()) {
    out << c.vertices.size();
    for (Index v : c.vertices) out << ' ' << v;
    out << '\n';
  }
  const auto boundary = mesh.boundary_edges();
  out << boundary.size() << '\n';
  for (const auto& e : boundary) out << e.a << ' ' << e.b << ' ' << e.marker << '\n';
  return out.str();
}

inline Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mesh file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_mesh(buffer.str());
}

inline void write_mesh_file(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write mesh file '" + path + "'");
  out << format_mesh(mesh);
  if (!out) throw IoError("write failure on '" + path + "'");
}

// ---------------------------------------------------------------------------
// Boundary groups
// ---------------------------------------------------------------------------

enum class BoundaryCondition { dirichlet, traction_free };

struct BoundaryGroup {
  std::string name;
  std::vector<int> markers;
  BoundaryCondition condition = BoundaryCondition::traction_free;

  bool contains(int m) const { return std::find(markers.begin(), markers.end(), m) != markers.end(); }
};

/// Checks that every boundary face marker belongs to exactly one group.
inline void validate_boundary_groups(const Mesh& mesh, const std::vector<BoundaryGroup>& groups) {
  for (const auto& f : mesh.faces()) {
    if (!f.is_boundary()) continue;
    int owners = 0;
    for (const auto& g : groups) owners += g.contains(f.marker) ? 1 : 0;
    if (owners != 1)
      throw ConfigError("boundary marker " + std::to_string(f.marker) + " belongs to " +
                        std::to_string(owners) + " boundary groups (expected exactly one)");
  }
}

/// Indices of boundary faces whose marker is in `group`.
inline std::vector<Index> faces_of_group(const Mesh& mesh, const BoundaryGroup& group) {
  std::vector<Index> out;
  for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
    const Face& f = mesh.face(static_cast<Index>(i));
    if (f.is_boundary() && group.contains(f.marker)) out.push_back(static_cast<Index>(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Notch cutting
// ---------------------------------------------------------------------------

/// Ordered vertex path of mesh edges following the segment [a, b], starting
/// at the boundary endpoint. Throws when the segment is not an edge path.
inline std::vector<Index> notch_path(const Mesh& mesh, const Point& a, const Point& b) {
  double scale = 0.;
  for (const auto& p : mesh.vertices()) scale = std::max(scale, p.cwiseAbs().maxCoeff());
  const double tol = 1e-9 * std::max(scale, 1.);
  if ((b - a).norm() <= tol) throw MeshError("notch segment has zero length");

  auto locate = [&](const Point& p) {
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i)
      if ((mesh.vertex(static_cast<Index>(i)) - p).norm() <= tol) return static_cast<Index>(i);
    throw MeshError("notch endpoint (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                    ") is not a mesh vertex");
  };
  const Index ia = locate(a);
  const Index ib = locate(b);

  std::vector<char> on_boundary(mesh.num_vertices(), 0);
  std::vector<std::vector<Index>> vertex_faces(mesh.num_vertices());
  for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
    const Face& f = mesh.face(static_cast<Index>(i));
    for (Index v : f.vertices) {
      vertex_faces[static_cast<std::size_t>(v)].push_back(static_cast<Index>(i));
      if (f.is_boundary()) on_boundary[static_cast<std::size_t>(v)] = 1;
    }
  }
  const bool a_bnd = on_boundary[static_cast<std::size_t>(ia)] != 0;
  const bool b_bnd = on_boundary[static_cast<std::size_t>(ib)] != 0;
  if (a_bnd == b_bnd)
    throw MeshError(a_bnd ? "notch has no interior tip (both endpoints on the boundary)"
                          : "notch must start on the boundary (both endpoints are interior)");
  const Index start = a_bnd ? ia : ib;
  const Index tip = a_bnd ? ib : ia;
  const Point p0 = mesh.vertex(start);
  const Vector2 dir = (mesh.vertex(tip) - p0).normalized();
  const double length = (mesh.vertex(tip) - p0).norm();

  std::vector<Index> path{start};
  Index current = start;
  double s_current = 0.;
  while (current != tip) {
    Index best = -1;
    double s_best = std::numeric_limits<double>::max();
    for (Index fi : vertex_faces[static_cast<std::size_t>(current)]) {
      const Face& f = mesh.face(fi);
      const Index w = f.vertices[0] == current ? f.vertices[1] : f.vertices[0];
      const Vector2 r = mesh.vertex(w) - p0;
      const double s = r.dot(dir);
      if (std::abs(cross(dir, r)) > tol || s <= s_current + tol || s > length + tol) continue;
      if (f.is_boundary()) throw MeshError("notch runs along the domain boundary");
      if (s < s_best) {
        s_best = s;
        best = w;
      }
    }
    if (best < 0) throw MeshError("notch segment is not resolvable as a path of mesh edges");
    if (best != tip && on_boundary[static_cast<std::size_t>(best)])
      throw MeshError("notch path touches the boundary before reaching its tip");
    path.push_back(best);
    current = best;
    s_current = s_best;
  }
  return path;
}

/// Cuts the mesh along the edge path [a, b]: vertices strictly inside the
/// path are duplicated, cells right of the path use the copies, and both new
/// face chains become boundary faces with marker `marker::notch`.
inline Mesh cut_notch(const Mesh& mesh, const Point& a, const Point& b) {
  const std::vector<Index> path = notch_path(mesh, a, b);
  if (path.size() < 3)
    throw MeshError("notch must span at least two mesh edges so that both sides stay distinct");
  const Point p0 = mesh.vertex(path.front());
  const Vector2 dir = (mesh.vertex(path.back()) - p0).normalized();

  std::vector<Point> vertices = mesh.vertices();
  std::map<Index, Index> copy_of;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    copy_of[path[i]] = static_cast<Index>(vertices.size());
    vertices.push_back(mesh.vertex(path[i]));
  }

  std::vector<std::vector<Index>> cells;
  cells.reserve(mesh.num_cells());
  for (std::size_t ic = 0; ic < mesh.num_cells(); ++ic) {
    const Cell& c = mesh.cell(static_cast<Index>(ic));
    std::vector<Index> vs = c.vertices;
    const bool touches = std::any_of(vs.begin(), vs.end(), [&](Index v) { return copy_of.count(v) > 0; });
    if (touches) {
      const double side = cross(dir, c.centroid - p0);
      if (std::abs(side) <= 1e-12 * c.diameter) throw MeshError("notch segment crosses a cell interior");
      if (side < 0.)
        for (auto& v : vs)
          if (auto it = copy_of.find(v); it != copy_of.end()) v = it->second;
    }
    cells.push_back(std::move(vs));
  }

  std::vector<BoundaryEdge> boundary = mesh.boundary_edges();
  auto copy = [&](Index v) {
    auto it = copy_of.find(v);
    return it == copy_of.end() ? v : it->second;
  };
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    boundary.push_back({path[i], path[i + 1], marker::notch});
    boundary.push_back({copy(path[i]), copy(path[i + 1]), marker::notch});
  }
  return Mesh(std::move(vertices), std::move(cells), boundary);
}

} // namespace hhofrac
