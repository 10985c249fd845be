#pragma once

// Mesh generators for rectangular domains: structured triangles, clipped
// honeycombs, and quadtree meshes whose hanging nodes become extra polygon
// vertices.

#include "common.hpp"
#include "mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hhofrac {

struct Box {
  double x0 = 0., y0 = 0., x1 = 1., y1 = 1.;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool intersects(const Box& o) const { return x0 < o.x1 && o.x0 < x1 && y0 < o.y1 && o.y0 < y1; }
};

/// Marks every edge used by exactly one cell with left/right/bottom/top
/// according to the side of `box` it lies on.
inline std::vector<BoundaryEdge> box_boundary(const std::vector<Point>& vertices,
                                              const std::vector<std::vector<Index>>& cells, const Box& box) {
  std::map<std::pair<Index, Index>, int> count;
  std::map<std::pair<Index, Index>, std::pair<Index, Index>> oriented;
  for (const auto& c : cells)
    for (std::size_t i = 0; i < c.size(); ++i) {
      const Index a = c[i], b = c[(i + 1) % c.size()];
      const auto key = std::minmax(a, b);
      ++count[{key.first, key.second}];
      oriented[{key.first, key.second}] = {a, b};
    }
  const double tol = 1e-9 * std::max(box.width(), box.height());
  std::vector<BoundaryEdge> out;
  for (const auto& [key, n] : count) {
    if (n != 1) continue;
    const auto [a, b] = oriented[key];
    const Point m = 0.5 * (vertices[static_cast<std::size_t>(a)] + vertices[static_cast<std::size_t>(b)]);
    int mk = marker::none;
    if (std::abs(m.x() - box.x0) < tol) mk = marker::left;
    else if (std::abs(m.x() - box.x1) < tol) mk = marker::right;
    else if (std::abs(m.y() - box.y0) < tol) mk = marker::bottom;
    else if (std::abs(m.y() - box.y1) < tol) mk = marker::top;
    out.push_back({a, b, mk});
  }
  return out;
}

/// nx x ny rectangles, each split along the diagonal from its lower-left to
/// its upper-right corner.
inline Mesh structured_triangles(int nx, int ny, const Box& box = {}) {
  if (nx < 1 || ny < 1) throw MeshError("structured mesh needs at least one division per direction");
  std::vector<Point> v;
  v.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      v.emplace_back(box.x0 + box.width() * i / nx, box.y0 + box.height() * j / ny);
  auto id = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
  std::vector<std::vector<Index>> cells;
  cells.reserve(static_cast<std::size_t>(2 * nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  auto boundary = box_boundary(v, cells, box);
  return Mesh(std::move(v), std::move(cells), boundary);
}

/// nx x ny axis-aligned rectangles.
inline Mesh structured_quads(int nx, int ny, const Box& box = {}) {
  if (nx < 1 || ny < 1) throw MeshError("structured mesh needs at least one division per direction");
  std::vector<Point> v;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v.emplace_back(box.x0 + box.width() * i / nx, box.y0 + box.height() * j / ny);
  auto id = [nx](int i, int j) { return static_cast<Index>(j * (nx + 1) + i); };
  std::vector<std::vector<Index>> cells;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  auto boundary = box_boundary(v, cells, box);
  return Mesh(std::move(v), std::move(cells), boundary);
}

namespace detail {

/// Sutherland-Hodgman clipping of a convex polygon against an axis-aligned box.
inline std::vector<Point> clip_to_box(std::vector<Point> poly, const Box& box) {
  auto clip = [&poly](auto inside, auto intersect) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point& p = poly[i];
      const Point& q = poly[(i + 1) % poly.size()];
      const bool pin = inside(p), qin = inside(q);
      if (pin) out.push_back(p);
      if (pin != qin) out.push_back(intersect(p, q));
    }
    poly = std::move(out);
  };
  auto at_x = [](double x) {
    return [x](const Point& p, const Point& q) {
      const double t = (x - p.x()) / (q.x() - p.x());
      return Point(x, p.y() + t * (q.y() - p.y()));
    };
  };
  auto at_y = [](double y) {
    return [y](const Point& p, const Point& q) {
      const double t = (y - p.y()) / (q.y() - p.y());
      return Point(p.x() + t * (q.x() - p.x()), y);
    };
  };
  const double eps = 1e-12 * std::max(box.width(), box.height());
  clip([&](const Point& p) { return p.x() >= box.x0 - eps; }, at_x(box.x0));
  clip([&](const Point& p) { return p.x() <= box.x1 + eps; }, at_x(box.x1));
  clip([&](const Point& p) { return p.y() >= box.y0 - eps; }, at_y(box.y0));
  clip([&](const Point& p) { return p.y() <= box.y1 + eps; }, at_y(box.y1));
  return poly;
}

/// Merges coincident points through a snapped coordinate key.
class PointIndex {
public:
  explicit PointIndex(double resolution) : resolution_(resolution) {}

  Index insert(const Point& p) {
    const auto key = std::make_pair(std::llround(p.x() / resolution_), std::llround(p.y() / resolution_));
    auto [it, inserted] = ids_.try_emplace(key, static_cast<Index>(points_.size()));
    if (inserted) points_.push_back(p);
    return it->second;
  }

  std::vector<Point>& points() { return points_; }

private:
  double resolution_;
  std::map<std::pair<long long, long long>, Index> ids_;
  std::vector<Point> points_;
};

} // namespace detail

/// Pointy-top hexagons on nx columns, stretched vertically so that rows of
/// centres lie on the bottom and top edges of `box`. Cells cut by the box
/// become pentagons or quadrilaterals. `ny = 0` picks the row count giving
/// nearly regular hexagons.
inline Mesh hexagonal_mesh(int nx, int ny = 0, const Box& box = {}) {
  if (nx < 1) throw MeshError("hexagonal mesh needs at least one column");
  const double dx = box.width() / nx;
  if (ny <= 0) ny = std::max(1, static_cast<int>(std::lround(box.height() / (dx * std::sqrt(3.) / 2.))));
  const double dy = box.height() / ny;
  const std::array<Vector2, 6> offsets = {Vector2(0., -2. * dy / 3.), Vector2(dx / 2., -dy / 3.),
                                          Vector2(dx / 2., dy / 3.),   Vector2(0., 2. * dy / 3.),
                                          Vector2(-dx / 2., dy / 3.),  Vector2(-dx / 2., -dy / 3.)};
  detail::PointIndex points(1e-9 * std::min(dx, dy));
  std::vector<std::vector<Index>> cells;
  for (int j = 0; j <= ny; ++j) {
    const double shift = (j % 2 == 1) ? 0.5 * dx : 0.;
    for (int i = -1; i <= nx + 1; ++i) {
      const Point c(box.x0 + i * dx + shift, box.y0 + j * dy);
      std::vector<Point> hex;
      for (const auto& o : offsets) hex.push_back(c + o);
      const std::vector<Point> poly = detail::clip_to_box(hex, box);
      if (poly.size() < 3) continue;
      double area2 = 0.;
      for (std::size_t k = 0; k < poly.size(); ++k) area2 += cross(poly[k], poly[(k + 1) % poly.size()]);
      if (area2 < 1e-6 * dx * dy) continue;
      std::vector<Index> ids;
      for (const Point& p : poly) {
        const Index id = points.insert(p);
        if (ids.empty() || (ids.back() != id && ids.front() != id)) ids.push_back(id);
      }
      if (ids.size() >= 3) cells.push_back(std::move(ids));
    }
  }
  auto boundary = box_boundary(points.points(), cells, box);
  return Mesh(std::move(points.points()), std::move(cells), boundary);
}

/// Quadtree mesh of `box`: a base grid of n0 x n0 squares, each leaf refined
/// while `refine(leaf_box, level)` holds and its level is below `max_level`,
/// then balanced so neighbouring leaves differ by at most one level.
inline Mesh quadtree_mesh(int n0, int max_level, const std::function<bool(const Box&, int)>& refine,
                          const Box& box = {}) {
  if (n0 < 1 || max_level < 0 || max_level > 12) throw MeshError("invalid quadtree parameters");
  const long long n_fine = static_cast<long long>(n0) << max_level;
  struct Leaf {
    long long x, y;
    int level;
    long long size(int max_level) const { return 1LL << (max_level - level); }
  };
  auto key = [n_fine](long long x, long long y) { return x * (n_fine + 1) + y; };
  auto to_box = [&](const Leaf& l) {
    const double s = static_cast<double>(l.size(max_level)) / static_cast<double>(n_fine);
    const double x = static_cast<double>(l.x) / static_cast<double>(n_fine);
    const double y = static_cast<double>(l.y) / static_cast<double>(n_fine);
    return Box{box.x0 + box.width() * x, box.y0 + box.height() * y, box.x0 + box.width() * (x + s),
               box.y0 + box.height() * (y + s)};
  };

  // Leaves keyed by lower-left corner and level.
  std::vector<Leaf> leaves;
  std::vector<Leaf> stack;
  for (int j = 0; j < n0; ++j)
    for (int i = 0; i < n0; ++i) stack.push_back({static_cast<long long>(i) << max_level, static_cast<long long>(j) << max_level, 0});
  while (!stack.empty()) {
    Leaf l = stack.back();
    stack.pop_back();
    if (l.level < max_level && refine(to_box(l), l.level)) {
      const long long h = l.size(max_level) / 2;
      for (int k = 0; k < 4; ++k) stack.push_back({l.x + (k % 2) * h, l.y + (k / 2) * h, l.level + 1});
    } else {
      leaves.push_back(l);
    }
  }

  // 2:1 balance. The level map stores, for each finest-grid cell, the level
  // of the leaf covering it.
  for (bool changed = true; changed;) {
    changed = false;
    std::unordered_map<long long, int> covering;
    covering.reserve(static_cast<std::size_t>(n_fine * n_fine / 4 + 16));
    for (const Leaf& l : leaves) {
      const long long s = l.size(max_level);
      for (long long a = 0; a < s; ++a)
        for (long long b = 0; b < s; ++b) covering[key(l.x + a, l.y + b)] = l.level;
    }
    std::vector<Leaf> next;
    next.reserve(leaves.size());
    for (const Leaf& l : leaves) {
      const long long s = l.size(max_level);
      int finest = l.level;
      auto probe = [&](long long x, long long y) {
        if (x < 0 || y < 0 || x >= n_fine || y >= n_fine) return;
        finest = std::max(finest, covering[key(x, y)]);
      };
      for (long long a = 0; a < s; ++a) {
        probe(l.x + a, l.y - 1);
        probe(l.x + a, l.y + s);
        probe(l.x - 1, l.y + a);
        probe(l.x + s, l.y + a);
      }
      if (finest > l.level + 1) {
        const long long h = s / 2;
        for (int k = 0; k < 4; ++k) next.push_back({l.x + (k % 2) * h, l.y + (k / 2) * h, l.level + 1});
        changed = true;
      } else {
        next.push_back(l);
      }
    }
    leaves = std::move(next);
  }
  std::sort(leaves.begin(), leaves.end(), [](const Leaf& a, const Leaf& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });

  std::unordered_map<long long, Index> vertex_id;
  std::vector<Point> vertices;
  auto vertex = [&](long long x, long long y) {
    auto [it, inserted] = vertex_id.try_emplace(key(x, y), static_cast<Index>(vertices.size()));
    if (inserted)
      vertices.emplace_back(box.x0 + box.width() * static_cast<double>(x) / static_cast<double>(n_fine),
                            box.y0 + box.height() * static_cast<double>(y) / static_cast<double>(n_fine));
    return it->second;
  };
  for (const Leaf& l : leaves) {
    const long long s = l.size(max_level);
    vertex(l.x, l.y);
    vertex(l.x + s, l.y);
    vertex(l.x + s, l.y + s);
    vertex(l.x, l.y + s);
  }
  // With 2:1 balance, a hanging node can only sit at an edge midpoint.
  std::vector<std::vector<Index>> cells;
  cells.reserve(leaves.size());
  for (const Leaf& l : leaves) {
    const long long s = l.size(max_level);
    const long long h = s / 2;
    const std::array<std::pair<long long, long long>, 4> corners = {
        std::make_pair(l.x, l.y), std::make_pair(l.x + s, l.y), std::make_pair(l.x + s, l.y + s),
        std::make_pair(l.x, l.y + s)};
    std::vector<Index> ids;
    for (std::size_t k = 0; k < 4; ++k) {
      const auto [ax, ay] = corners[k];
      const auto [bx, by] = corners[(k + 1) % 4];
      ids.push_back(vertex_id.at(key(ax, ay)));
      if (h > 0) {
        auto it = vertex_id.find(key((ax + bx) / 2, (ay + by) / 2));
        if (it != vertex_id.end()) ids.push_back(it->second);
      }
    }
    cells.push_back(std::move(ids));
  }
  auto boundary = box_boundary(vertices, cells, box);
  return Mesh(std::move(vertices), std::move(cells), boundary);
}

} // namespace hhofrac
