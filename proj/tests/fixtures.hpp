#pragma once

// Shared meshes and random generators for the test suite.

#include <hhofrac/hhofrac.hpp>

#include <cmath>
#include <random>
#include <vector>

namespace fixtures {

using namespace hhofrac;

inline Mesh single_cell(const std::vector<Point>& polygon) {
  std::vector<Index> ids(polygon.size());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<Index>(i);
  return Mesh(polygon, {ids}, {});
}

inline Mesh unit_triangle() { return single_cell({Point(0, 0), Point(1, 0), Point(0, 1)}); }

inline Mesh unit_square() { return single_cell({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}); }

inline Mesh two_triangles() {
  return Mesh({Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1)}, {{0, 1, 2}, {0, 2, 3}},
              {{0, 1, marker::bottom}, {1, 2, marker::right}, {2, 3, marker::top}, {3, 0, marker::left}});
}

inline std::vector<Point> regular_polygon(int n, double radius = 1., const Point& center = Point::Zero(),
                                          double phase = 0.) {
  std::vector<Point> p;
  for (int k = 0; k < n; ++k) {
    const double t = phase + 2. * M_PI * k / n;
    p.push_back(center + radius * Point(std::cos(t), std::sin(t)));
  }
  return p;
}

/// Three hexagons meeting at the origin.
inline Mesh hexagon_patch() {
  const double r = 1.;
  const double s = std::sqrt(3.) * r;
  std::vector<Point> centers = {Point(0, 0), Point(s, 0), Point(s / 2, 1.5 * r)};
  std::vector<Point> vertices;
  std::vector<std::vector<Index>> cells;
  auto id = [&](const Point& p) {
    for (std::size_t i = 0; i < vertices.size(); ++i)
      if ((vertices[i] - p).norm() < 1e-12) return static_cast<Index>(i);
    vertices.push_back(p);
    return static_cast<Index>(vertices.size() - 1);
  };
  for (const auto& c : centers) {
    std::vector<Index> ids;
    for (const auto& p : regular_polygon(6, r, c, M_PI / 6)) ids.push_back(id(p));
    cells.push_back(ids);
  }
  return Mesh(vertices, cells, {});
}

/// Star-shaped, non-convex arrow-head polygon (reflex vertex at (0.5, 0.3)).
inline std::vector<Point> nonconvex_polygon() {
  return {Point(0, 0), Point(0.5, 0.3), Point(1, 0), Point(1, 1), Point(0, 1)};
}

/// Random convex or star-shaped polygons of varying shape and scale.
class PolygonGenerator {
public:
  explicit PolygonGenerator(unsigned seed) : rng_(seed) {}

  std::vector<Point> triangle() {
    for (;;) {
      std::vector<Point> p = {random_point(), random_point(), random_point()};
      const double a = cross(p[1] - p[0], p[2] - p[0]);
      if (std::abs(a) < 0.05) continue;
      if (a < 0) std::swap(p[1], p[2]);
      return transform(p);
    }
  }

  std::vector<Point> quadrilateral() { return perturbed(4, 0.25); }
  std::vector<Point> hexagon() { return perturbed(6, 0.2); }

  std::vector<Point> star() {
    std::vector<Point> p = nonconvex_polygon();
    std::uniform_real_distribution<double> d(-0.05, 0.05);
    for (auto& q : p) q += Point(d(rng_), d(rng_));
    return transform(p);
  }

  std::mt19937& rng() { return rng_; }

private:
  Point random_point() {
    std::uniform_real_distribution<double> d(0., 1.);
    return Point(d(rng_), d(rng_));
  }

  std::vector<Point> perturbed(int n, double jitter) {
    std::uniform_real_distribution<double> d(-jitter, jitter);
    std::vector<Point> p;
    for (int k = 0; k < n; ++k) {
      const double t = 2. * M_PI * (k + d(rng_) * 0.5) / n;
      const double r = 1. + d(rng_);
      p.emplace_back(r * std::cos(t), r * std::sin(t));
    }
    return transform(p);
  }

  /// Random rotation, anisotropic stretch, scale and shift into the unit square.
  std::vector<Point> transform(std::vector<Point> p) {
    std::uniform_real_distribution<double> ang(0., 2. * M_PI), stretch(0.5, 2.), scale(1e-2, 1.), shift(0., 1.);
    const double a = ang(rng_), sx = stretch(rng_), s = scale(rng_);
    const Point o(shift(rng_), shift(rng_));
    Eigen::Matrix2d rot;
    rot << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
    for (auto& q : p) q = o + s * rot * Point(sx * q.x(), q.y());
    return p;
  }

  std::mt19937 rng_;
};

/// Random quadratic vector field: 12 coefficients on the monomials
/// (1, r, s, r^2, rs, s^2) of the local coordinates (r, s) = (x - center) / scale.
struct Quadratic {
  Eigen::Matrix<double, 2, 6> c;
  Point center = Point::Zero();
  double scale = 1.;

  static Quadratic random(std::mt19937& rng, const Point& center = Point::Zero(), double scale = 1.) {
    std::uniform_real_distribution<double> d(-1., 1.);
    Quadratic q;
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 6; ++j) q.c(i, j) = d(rng);
    q.center = center;
    q.scale = scale;
    return q;
  }

  Vector2 operator()(const Point& x) const {
    const Point r = (x - center) / scale;
    Eigen::Matrix<double, 6, 1> m;
    m << 1, r.x(), r.y(), r.x() * r.x(), r.x() * r.y(), r.y() * r.y();
    return c * m;
  }

  /// Symmetric gradient at x.
  Strain2 strain(const Point& x) const {
    const Point r = (x - center) / scale;
    const double dux_dx = (c(0, 1) + 2 * c(0, 3) * r.x() + c(0, 4) * r.y()) / scale;
    const double dux_dy = (c(0, 2) + c(0, 4) * r.x() + 2 * c(0, 5) * r.y()) / scale;
    const double duy_dx = (c(1, 1) + 2 * c(1, 3) * r.x() + c(1, 4) * r.y()) / scale;
    const double duy_dy = (c(1, 2) + c(1, 4) * r.x() + 2 * c(1, 5) * r.y()) / scale;
    return {dux_dx, duy_dy, 0.5 * (dux_dy + duy_dx)};
  }

  /// A field sampled in the scaled coordinates of a mesh cell.
  static Quadratic random_on(std::mt19937& rng, const Mesh& mesh, Index cell) {
    return random(rng, mesh.cell(cell).centroid, mesh.cell(cell).diameter);
  }
};

} // namespace fixtures
