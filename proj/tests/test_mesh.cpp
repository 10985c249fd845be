#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace hhofrac;

namespace {

Vector2 closure(const Mesh& m, Index c) {
  Vector2 s = Vector2::Zero();
  const Cell& cell = m.cell(c);
  for (std::size_t f = 0; f < cell.num_faces(); ++f) s += m.face(cell.faces[f]).measure * m.normal(c, f);
  return s;
}

int internal_by_adjacency(const Mesh& m) {
  std::set<std::pair<Index, Index>> pairs;
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    for (Index f : m.cell(static_cast<Index>(c)).faces) {
      const Face& face = m.face(f);
      if (!face.is_boundary()) pairs.insert({f, static_cast<Index>(c)});
    }
  return static_cast<int>(pairs.size()) / 2;
}

int two_sided(const Mesh& m) {
  int n = 0;
  for (const auto& f : m.faces()) n += f.cells[1] >= 0;
  return n;
}

} // namespace

TEST(Mesh, UnitSquareSingleCell) {
  const Mesh m = parse_mesh("4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n4\n0 1 3\n1 2 2\n2 3 4\n3 0 1\n");
  ASSERT_EQ(m.num_faces(), 4u);
  EXPECT_DOUBLE_EQ(m.cell(0).measure, 1.);
  EXPECT_NEAR((m.cell(0).centroid - Point(0.5, 0.5)).norm(), 0., 1e-15);
  const std::vector<Vector2> expected = {Vector2(0, -1), Vector2(1, 0), Vector2(0, 1), Vector2(-1, 0)};
  for (std::size_t f = 0; f < 4; ++f) EXPECT_NEAR((m.normal(0, f) - expected[f]).norm(), 0., 1e-15);
  EXPECT_EQ(m.face(m.cell(0).faces[0]).marker, marker::bottom);
  EXPECT_EQ(m.face(m.cell(0).faces[3]).marker, marker::left);
}

TEST(Mesh, SquareSplitIntoTwoTriangles) {
  const Mesh m = fixtures::two_triangles();
  EXPECT_EQ(m.num_faces(), 5u);
  int shared = 0;
  for (const auto& f : m.faces())
    if (!f.is_boundary()) {
      ++shared;
      EXPECT_NE(f.cells[0], f.cells[1]);
    }
  EXPECT_EQ(shared, 1);
}

TEST(Mesh, HexagonPatchClosure) {
  const Mesh m = fixtures::hexagon_patch();
  ASSERT_EQ(m.num_cells(), 3u);
  for (Index c = 0; c < 3; ++c) {
    EXPECT_LT(closure(m, c).norm(), 1e-12 * m.cell(c).diameter);
    EXPECT_NEAR(m.cell(c).measure, 3. * std::sqrt(3.) / 2., 1e-12);
  }
  EXPECT_EQ(m.num_faces(), 15u);
  EXPECT_EQ(two_sided(m), 3);
}

TEST(Mesh, NormalsPointOutward) {
  for (const Mesh& m : {structured_triangles(4, 3), hexagonal_mesh(5), fixtures::hexagon_patch()})
    for (std::size_t c = 0; c < m.num_cells(); ++c) {
      const Cell& cell = m.cell(static_cast<Index>(c));
      for (std::size_t f = 0; f < cell.num_faces(); ++f)
        EXPECT_GT(m.normal(static_cast<Index>(c), f).dot(m.face(cell.faces[f]).midpoint - cell.centroid), 0.);
    }
}

TEST(Mesh, RejectsMalformedInput) {
  EXPECT_THROW(parse_mesh(""), MeshError);
  EXPECT_THROW(parse_mesh("3 1\n0 0\n1 0\n"), MeshError);
  EXPECT_THROW(parse_mesh("3 1\n0 0\n1 0\n0 1\n3 0 1 5\n0\n"), MeshError);
  // Clockwise cell.
  EXPECT_THROW(parse_mesh("3 1\n0 0\n1 0\n0 1\n3 0 2 1\n0\n"), MeshError);
  // Degenerate cell.
  EXPECT_THROW(parse_mesh("3 1\n0 0\n1 0\n2 0\n3 0 1 2\n0\n"), MeshError);
  // Boundary entry naming an internal edge.
  EXPECT_THROW(parse_mesh("4 2\n0 0\n1 0\n1 1\n0 1\n3 0 1 2\n3 0 2 3\n1\n0 2 1\n"), MeshError);
}

TEST(Mesh, FormatRoundTrip) {
  const Mesh m = hexagonal_mesh(4);
  const Mesh r = parse_mesh(format_mesh(m));
  ASSERT_EQ(r.num_cells(), m.num_cells());
  ASSERT_EQ(r.num_faces(), m.num_faces());
  for (std::size_t i = 0; i < m.num_vertices(); ++i)
    EXPECT_EQ(r.vertex(static_cast<Index>(i)), m.vertex(static_cast<Index>(i)));
  for (std::size_t i = 0; i < m.num_faces(); ++i) EXPECT_EQ(r.face(static_cast<Index>(i)).marker, m.face(static_cast<Index>(i)).marker);
  EXPECT_EQ(format_mesh(r), format_mesh(m));
}

TEST(Mesh, EulerAudit) {
  for (const Mesh& m : {structured_triangles(6, 5), hexagonal_mesh(7), structured_quads(3, 4)})
    EXPECT_EQ(internal_by_adjacency(m), two_sided(m));
}

TEST(CutNotch, VertexCountGrowsByInteriorPathVertices) {
  const int n = 8;
  const Mesh m = structured_triangles(n, n);
  const Mesh c = cut_notch(m, Point(0.5, 0.), Point(0.5, 0.5));
  // The path visits vertices at y = 0, 1/8, ..., 4/8; all but its two ends are copied.
  const std::size_t path_vertices = n / 2 + 1;
  EXPECT_EQ(c.num_vertices(), m.num_vertices() + path_vertices - 2);
  EXPECT_EQ(c.num_cells(), m.num_cells());
}

TEST(CutNotch, PreservesCellsAndAddsTwiceThePathLength) {
  const Mesh m = structured_triangles(10, 10);
  const Mesh c = cut_notch(m, Point(0.5, 0.), Point(0.5, 0.5));
  for (std::size_t i = 0; i < m.num_cells(); ++i)
    EXPECT_NEAR(c.cell(static_cast<Index>(i)).measure, m.cell(static_cast<Index>(i)).measure, 1e-15);
  EXPECT_NEAR(c.boundary_measure(), m.boundary_measure() + 2. * 0.5, 1e-13);
  double notch = 0.;
  for (const auto& f : c.faces())
    if (f.is_boundary() && f.marker == marker::notch) notch += f.measure;
  EXPECT_NEAR(notch, 1.0, 1e-13);
  EXPECT_EQ(internal_by_adjacency(c), two_sided(c));
}

TEST(CutNotch, TipVertexStaysShared) {
  const Mesh m = structured_triangles(4, 4);
  const Mesh c = cut_notch(m, Point(0.5, 0.), Point(0.5, 0.5));
  Index tip = -1;
  for (std::size_t i = 0; i < c.num_vertices(); ++i)
    if ((c.vertex(static_cast<Index>(i)) - Point(0.5, 0.5)).norm() < 1e-14) {
      EXPECT_EQ(tip, -1);
      tip = static_cast<Index>(i);
    }
  EXPECT_GE(tip, 0);
}

TEST(CutNotch, RejectsInvalidSegments) {
  const Mesh m = structured_triangles(4, 4);
  EXPECT_THROW(cut_notch(m, Point(0.5, 0.), Point(0.5, 0.)), MeshError);
  EXPECT_THROW(cut_notch(m, Point(0., 0.), Point(1., 0.)), MeshError);
  EXPECT_THROW(cut_notch(m, Point(0.5, 0.), Point(0.6, 0.5)), MeshError);
  EXPECT_THROW(cut_notch(m, Point(0.25, 0.25), Point(0.5, 0.5)), MeshError);
}

TEST(CutNotch, WorksOnQuadtreeWithHangingNodes) {
  const Mesh m = quadtree_mesh(4, 2, [](const Box& b, int) { return b.intersects({0.4, 0.4, 1., 1.}); });
  const Mesh c = cut_notch(m, Point(0.5, 0.), Point(0.5, 0.5));
  EXPECT_NEAR(c.boundary_measure(), m.boundary_measure() + 1., 1e-13);
}

TEST(Generators, BoundaryFullyMarked) {
  const Mesh q = quadtree_mesh(4, 3, [](const Box& b, int) { return b.intersects({0.45, 0.45, 1., 1.}); });
  for (const Mesh& m : {structured_triangles(5, 7), hexagonal_mesh(6), q}) {
    double area = 0.;
    for (const auto& c : m.cells()) area += c.measure;
    EXPECT_NEAR(area, 1., 1e-12);
    EXPECT_NEAR(m.boundary_measure(), 4., 1e-12);
    for (const auto& f : m.faces())
      if (f.is_boundary()) EXPECT_NE(f.marker, marker::none);
  }
}

TEST(Generators, QuadtreeIsBalanced) {
  const Mesh q = quadtree_mesh(2, 5, [](const Box& b, int) { return b.x0 < 0.01 && b.y0 < 0.01; });
  for (std::size_t i = 0; i < q.num_faces(); ++i) {
    const Face& f = q.face(static_cast<Index>(i));
    if (f.is_boundary()) continue;
    const double a = q.cell(f.cells[0]).measure, b = q.cell(f.cells[1]).measure;
    EXPECT_LE(std::max(a, b) / std::min(a, b), 4. + 1e-9);
  }
  std::size_t max_faces = 0;
  for (const auto& c : q.cells()) max_faces = std::max(max_faces, c.num_faces());
  EXPECT_GT(max_faces, 4u);
  EXPECT_LE(max_faces, 8u);
}

TEST(BoundaryGroups, PartitionChecks) {
  const Mesh m = structured_triangles(3, 3);
  std::vector<BoundaryGroup> groups = {{"left", {marker::left}, BoundaryCondition::dirichlet},
                                       {"right", {marker::right}, BoundaryCondition::dirichlet},
                                       {"other", {marker::top, marker::bottom}, BoundaryCondition::traction_free}};
  EXPECT_NO_THROW(validate_boundary_groups(m, groups));
  EXPECT_EQ(faces_of_group(m, groups[0]).size(), 3u);
  groups.pop_back();
  EXPECT_THROW(validate_boundary_groups(m, groups), ConfigError);
}
