#pragma once

// Crack-band detection on the cell phase values.

#include "mesh.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace hhofrac {

/// Connected groups of cells whose phase value exceeds `threshold`. Two such
/// cells are connected when they share a vertex. Groups are sorted by size,
/// largest first; cell indices within a group are ascending.
inline std::vector<std::vector<Index>> phase_clusters(const Mesh& mesh, const Vector& phase, double threshold) {
  const auto nc = static_cast<Index>(mesh.num_cells());
  std::vector<Index> parent(static_cast<std::size_t>(nc));
  std::iota(parent.begin(), parent.end(), Index{0});
  auto find = [&](Index i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      auto& p = parent[static_cast<std::size_t>(i)];
      p = parent[static_cast<std::size_t>(p)];
      i = p;
    }
    return i;
  };
  std::vector<Index> owner(mesh.num_vertices(), -1);
  for (Index c = 0; c < nc; ++c) {
    if (!(phase[c] > threshold)) continue;
    for (Index v : mesh.cell(c).vertices) {
      Index& o = owner[static_cast<std::size_t>(v)];
      if (o < 0) o = c;
      else parent[static_cast<std::size_t>(find(c))] = find(o);
    }
  }
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(nc));
  for (Index c = 0; c < nc; ++c)
    if (phase[c] > threshold) groups[static_cast<std::size_t>(find(c))].push_back(c);
  std::vector<std::vector<Index>> out;
  for (auto& g : groups)
    if (!g.empty()) out.push_back(std::move(g));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return out;
}

/// True when some cell of `cells` has a vertex on a boundary face with
/// marker `m`. A band may end at a boundary corner of its last cell.
inline bool touches_marker(const Mesh& mesh, const std::vector<Index>& cells, int m) {
  std::vector<char> on(mesh.num_vertices(), 0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.face(static_cast<Index>(f));
    if (face.is_boundary() && face.marker == m)
      for (Index v : face.vertices) on[static_cast<std::size_t>(v)] = 1;
  }
  for (Index c : cells)
    for (Index v : mesh.cell(c).vertices)
      if (on[static_cast<std::size_t>(v)]) return true;
  return false;
}

/// True when some cell of `cells` has a vertex within `radius` of `x`.
inline bool touches_point(const Mesh& mesh, const std::vector<Index>& cells, const Point& x, double radius) {
  for (Index c : cells)
    for (Index v : mesh.cell(c).vertices)
      if ((mesh.vertex(v) - x).norm() <= radius) return true;
  return false;
}

} // namespace hhofrac
