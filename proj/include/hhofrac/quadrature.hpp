#pragma once

// Quadrature on segments (Gauss-Legendre) and polygons (centroid fan of
// triangles with symmetric triangle rules, or collapsed Gauss rules above
// degree 4).

#include "common.hpp"
#include "mesh.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

namespace hhofrac {

struct QuadNode {
  Point x;
  double w;
};

/// Physical nodes and weights; `degree` is the polynomial exactness.
struct QuadRule {
  std::vector<QuadNode> nodes;
  int degree = 0;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.;
    for (const auto& n : nodes) s += n.w;
    return s;
  }
  auto begin() const { return nodes.begin(); }
  auto end() const { return nodes.end(); }
};

inline constexpr int default_quadrature_degree = 4;

namespace detail {

/// Returns (P_n(x), P_{n-1}(x)) by the three-term recurrence.
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1., p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2. * k - 1.) * x * p1 - (k - 1.) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return {p1, p0};
}

} // namespace detail

/// Gauss-Legendre nodes/weights on [-1, 1] with `n` points.
inline std::vector<std::pair<double, double>> gauss_legendre(int n) {
  std::vector<std::pair<double, double>> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [pn, pm] = detail::legendre(n, x);
      const double dx = pn / (n * (x * pn - pm) / (x * x - 1.));
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const auto [pn, pm] = detail::legendre(n, x);
    const double dp = n * (x * pn - pm) / (x * x - 1.);
    out[static_cast<std::size_t>(i)] = {x, 2. / ((1. - x * x) * dp * dp)};
  }
  return out;
}

/// Rule on the segment [a, b], exact up to `degree`.
inline QuadRule segment_quadrature(const Point& a, const Point& b, int degree) {
  const int n = degree / 2 + 1;
  const double half = 0.5 * (b - a).norm();
  QuadRule rule;
  rule.degree = 2 * n - 1;
  for (auto [t, w] : gauss_legendre(n)) rule.nodes.push_back({0.5 * (a + b) + 0.5 * t * (b - a), half * w});
  return rule;
}

inline QuadRule face_quadrature(const Mesh& mesh, Index face, int degree = default_quadrature_degree) {
  const Face& f = mesh.face(face);
  return segment_quadrature(mesh.vertex(f.vertices[0]), mesh.vertex(f.vertices[1]), degree);
}

namespace detail {

struct BarycentricNode {
  std::array<double, 3> lambda;
  double w; // fraction of the triangle area
};

/// Symmetric rules on the reference triangle (weights sum to 1).
inline const std::vector<BarycentricNode>& triangle_rule(int degree) {
  static const std::vector<BarycentricNode> d1{{{1. / 3., 1. / 3., 1. / 3.}, 1.}};
  static const std::vector<BarycentricNode> d2{
      {{2. / 3., 1. / 6., 1. / 6.}, 1. / 3.},
      {{1. / 6., 2. / 3., 1. / 6.}, 1. / 3.},
      {{1. / 6., 1. / 6., 2. / 3.}, 1. / 3.}};
  static const std::vector<BarycentricNode> d4 = [] {
    const double a1 = 0.445948490915964886318329253883, b1 = 1. - 2. * a1;
    const double w1 = 0.223381589678011465944640202135;
    const double a2 = 0.091576213509770743459571463402, b2 = 1. - 2. * a2;
    const double w2 = 0.109951743655321867388693130532;
    return std::vector<BarycentricNode>{
        {{b1, a1, a1}, w1}, {{a1, b1, a1}, w1}, {{a1, a1, b1}, w1},
        {{b2, a2, a2}, w2}, {{a2, b2, a2}, w2}, {{a2, a2, b2}, w2}};
  }();
  if (degree <= 1) return d1;
  if (degree == 2) return d2;
  return d4;
}

inline void append_triangle(QuadRule& rule, const Point& p0, const Point& p1, const Point& p2, int degree) {
  const double area = 0.5 * cross(p1 - p0, p2 - p0);
  if (!(area > 0.)) throw GeometryError("quadrature sub-triangle with non-positive area");
  if (degree <= 4) {
    for (const auto& n : triangle_rule(degree))
      rule.nodes.push_back({n.lambda[0] * p0 + n.lambda[1] * p1 + n.lambda[2] * p2, n.w * area});
    return;
  }
  // Collapsed (Duffy) product of Gauss rules for higher degrees.
  const int n = (degree + 2) / 2 + 1;
  const auto gl = gauss_legendre(n);
  for (auto [u, wu] : gl) {
    const double s = 0.5 * (u + 1.);
    for (auto [v, wv] : gl) {
      const double t = 0.5 * (v + 1.);
      const double l1 = s * (1. - t);
      const double l2 = s * t;
      const Point x = (1. - s) * p0 + l1 * p1 + l2 * p2;
      rule.nodes.push_back({x, 2. * area * 0.25 * wu * wv * s});
    }
  }
}

} // namespace detail

/// Rule on a triangle given by its vertices (CCW).
inline QuadRule triangle_quadrature(const Point& p0, const Point& p1, const Point& p2, int degree) {
  QuadRule rule;
  rule.degree = degree;
  detail::append_triangle(rule, p0, p1, p2, degree);
  return rule;
}

/// Rule on a mesh cell. Triangles use a rule directly; other polygons are
/// split into a fan of triangles around the centroid.
inline QuadRule cell_quadrature(const Mesh& mesh, Index cell, int degree = default_quadrature_degree) {
  const Cell& c = mesh.cell(cell);
  QuadRule rule;
  rule.degree = std::max(degree, 1);
  const std::size_t k = c.vertices.size();
  if (k == 3) {
    detail::append_triangle(rule, mesh.vertex(c.vertices[0]), mesh.vertex(c.vertices[1]),
                            mesh.vertex(c.vertices[2]), rule.degree);
    return rule;
  }
  for (std::size_t i = 0; i < k; ++i)
    detail::append_triangle(rule, c.centroid, mesh.vertex(c.vertices[i]), mesh.vertex(c.vertices[(i + 1) % k]),
                            rule.degree);
  return rule;
}

} // namespace hhofrac
