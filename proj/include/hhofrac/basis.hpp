#pragma once

// Scaled monomial bases on cells and faces, Gram matrices and L2 projectors.

#include "common.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

#include <utility>
#include <vector>

namespace hhofrac {

/// Monomials ((x - xT) / hT)^a ((y - yT) / hT)^b with a + b <= degree,
/// ordered by total degree: 1, X, Y, X^2, XY, Y^2, ...
class CellBasis {
public:
  CellBasis(int degree, const Point& center, double scale)
      : degree_(degree), center_(center), scale_(scale) {
    for (int d = 0; d <= degree; ++d)
      for (int b = 0; b <= d; ++b) powers_.emplace_back(d - b, b);
  }

  static CellBasis of(const Mesh& mesh, Index cell, int degree) {
    const Cell& c = mesh.cell(cell);
    return CellBasis(degree, c.centroid, c.diameter);
  }

  int degree() const { return degree_; }
  Index dimension() const { return static_cast<Index>(powers_.size()); }
  static constexpr Index dimension(int degree) { return (degree + 1) * (degree + 2) / 2; }
  const Point& center() const { return center_; }
  double scale() const { return scale_; }

  Vector values(const Point& x) const {
    const Vector2 r = (x - center_) / scale_;
    Vector v(dimension());
    for (std::size_t i = 0; i < powers_.size(); ++i)
      v[static_cast<Index>(i)] = ipow(r.x(), powers_[i].first) * ipow(r.y(), powers_[i].second);
    return v;
  }

  /// Row i holds the gradient of basis function i.
  Eigen::Matrix<double, Eigen::Dynamic, 2> gradients(const Point& x) const {
    const Vector2 r = (x - center_) / scale_;
    Eigen::Matrix<double, Eigen::Dynamic, 2> g(dimension(), 2);
    for (std::size_t i = 0; i < powers_.size(); ++i) {
      const auto [a, b] = powers_[i];
      const auto row = static_cast<Index>(i);
      g(row, 0) = a == 0 ? 0. : a * ipow(r.x(), a - 1) * ipow(r.y(), b) / scale_;
      g(row, 1) = b == 0 ? 0. : b * ipow(r.x(), a) * ipow(r.y(), b - 1) / scale_;
    }
    return g;
  }

private:
  static double ipow(double x, int n) {
    double r = 1.;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
  }

  int degree_;
  Point center_;
  double scale_;
  std::vector<std::pair<int, int>> powers_;
};

/// Monomials ((x - xF) . tF / hF)^k, k <= degree, in the arclength coordinate
/// centred at the face midpoint.
class FaceBasis {
public:
  FaceBasis(int degree, const Point& midpoint, const Vector2& tangent, double scale)
      : degree_(degree), midpoint_(midpoint), tangent_(tangent), scale_(scale) {}

  static FaceBasis of(const Mesh& mesh, Index face, int degree) {
    const Face& f = mesh.face(face);
    return FaceBasis(degree, f.midpoint, f.tangent, f.diameter());
  }

  int degree() const { return degree_; }
  Index dimension() const { return degree_ + 1; }

  Vector values(const Point& x) const {
    const double t = (x - midpoint_).dot(tangent_) / scale_;
    Vector v(dimension());
    double p = 1.;
    for (Index k = 0; k < dimension(); ++k, p *= t) v[k] = p;
    return v;
  }

private:
  int degree_;
  Point midpoint_;
  Vector2 tangent_;
  double scale_;
};

/// Gram matrix of `basis` under `quad`.
template <class Basis>
Matrix gram_matrix(const Basis& basis, const QuadRule& quad) {
  Matrix m = Matrix::Zero(basis.dimension(), basis.dimension());
  for (const auto& n : quad) {
    const Vector phi = basis.values(n.x);
    m.noalias() += n.w * phi * phi.transpose();
  }
  return m;
}

/// Mixed mass matrix: rows from `test`, columns from `trial`.
template <class TestBasis, class TrialBasis>
Matrix mass_matrix(const TestBasis& test, const TrialBasis& trial, const QuadRule& quad) {
  Matrix m = Matrix::Zero(test.dimension(), trial.dimension());
  for (const auto& n : quad) m.noalias() += n.w * test.values(n.x) * trial.values(n.x).transpose();
  return m;
}

/// Solves `gram * x = rhs` by Cholesky; throws on a singular Gram matrix.
inline Matrix solve_gram(const Matrix& gram, const Matrix& rhs) {
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw GeometryError("singular Gram matrix (degenerate geometry)");
  return llt.solve(rhs);
}

/// Coefficients of the L2 projection of a scalar field on the span of `basis`.
template <class Basis, class Field>
Vector l2_project(const Basis& basis, const QuadRule& quad, Field&& f) {
  Vector rhs = Vector::Zero(basis.dimension());
  for (const auto& n : quad) rhs += n.w * f(n.x) * basis.values(n.x);
  return solve_gram(gram_matrix(basis, quad), rhs);
}

/// Projection of a vector field, returned component-major: [x coeffs; y coeffs].
template <class Basis, class Field>
Vector l2_project_vector(const Basis& basis, const QuadRule& quad, Field&& f) {
  const Index n = basis.dimension();
  Matrix rhs = Matrix::Zero(n, 2);
  for (const auto& q : quad) {
    const Vector2 v = f(q.x);
    const Vector phi = basis.values(q.x);
    rhs.col(0) += q.w * v.x() * phi;
    rhs.col(1) += q.w * v.y() * phi;
  }
  const Matrix c = solve_gram(gram_matrix(basis, quad), rhs);
  Vector out(2 * n);
  out << c.col(0), c.col(1);
  return out;
}

/// Evaluates a scalar polynomial given by its coefficients.
template <class Basis>
double evaluate(const Basis& basis, const Eigen::Ref<const Vector>& coeffs, const Point& x) {
  return basis.values(x).dot(coeffs);
}

} // namespace hhofrac
