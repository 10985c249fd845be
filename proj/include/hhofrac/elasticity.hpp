#pragma once

// Local HHO operators for linear elasticity with P1 cell and face unknowns:
// symmetric strain reconstruction in P1(T; Sym), divergence, quadratic
// displacement reconstruction, stabilization, local matrix and static
// condensation.
//
// Local DOF layout (N = 6 + 4 * nF):
//   cell : [ux(1, X, Y), uy(1, X, Y)]
//   face f at 6 + 4 f : [ux(1, t), uy(1, t)]
// Strain coefficients (9): [xx(1, X, Y), yy(1, X, Y), xy(1, X, Y)], where
// the xy block multiplies e1 (x) e2 + e2 (x) e1.

#include "basis.hpp"
#include "common.hpp"
#include "energy.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

#include <functional>
#include <string>
#include <string_view>

namespace hhofrac {

enum class Stabilization {
  face_difference, ///< sum_F hF^-1 |dTF - dT|^2_F
  cell_plus_face,  ///< hT^-2 |dT|^2_T + sum_F hF^-1 |dTF|^2_F
};

inline Stabilization parse_stabilization(std::string_view s) {
  if (s == "face-difference") return Stabilization::face_difference;
  if (s == "cell-plus-face") return Stabilization::cell_plus_face;
  throw ConfigError("unknown stabilization '" + std::string(s) + "' (face-difference | cell-plus-face)");
}

inline std::string_view to_string(Stabilization s) {
  return s == Stabilization::face_difference ? "face-difference" : "cell-plus-face";
}

namespace elastic_dofs {
inline constexpr Index cell = 6;
inline constexpr Index face = 4;
inline constexpr Index strain = 9;
inline constexpr Index quadratic = 12;
inline Index local_size(std::size_t num_faces) { return cell + face * static_cast<Index>(num_faces); }
} // namespace elastic_dofs

using StrainCoeffs = Eigen::Matrix<double, 9, 1>;

/// Value at `x` of a strain field given by its coefficients on `basis` (degree 1).
inline Strain2 evaluate_strain(const CellBasis& basis, const Eigen::Ref<const Vector>& c, const Point& x) {
  const Vector m = basis.values(x);
  return {m.dot(c.segment(0, 3)), m.dot(c.segment(3, 3)), m.dot(c.segment(6, 3))};
}

struct LocalElasticOperators {
  std::size_t num_faces = 0;
  double diameter = 0.;
  Matrix strain;         ///< 9 x N: DOFs -> strain coefficients
  Matrix divergence;     ///< 3 x N: DOFs -> P1 coefficients of tr(strain)
  Matrix reconstruction; ///< 12 x N: DOFs -> P2 displacement [x(6); y(6)]
  Matrix stabilization;  ///< N x N
  Matrix strain_mass;    ///< 9 x 9, Gram matrix under ':'
  Matrix trace_mass;     ///< 9 x 9, Gram matrix of traces

  Index size() const { return elastic_dofs::local_size(num_faces); }

  /// Local matrix of 2 mu E:E + lambda D D + 2 mu s_T.
  Matrix matrix(const MaterialParams& p) const {
    const Matrix c = 2. * p.mu * strain_mass + p.lambda * trace_mass;
    Matrix a = strain.transpose() * c * strain + 2. * p.mu * stabilization;
    return 0.5 * (a + a.transpose());
  }
};

/// Builds the local operators of `cell`.
inline LocalElasticOperators build_elastic_operators(const Mesh& mesh, Index cell,
                                                     Stabilization variant = Stabilization::face_difference) {
  const Cell& c = mesh.cell(cell);
  const std::size_t nf = c.num_faces();
  const Index n = elastic_dofs::local_size(nf);
  const CellBasis b1 = CellBasis::of(mesh, cell, 1);
  const CellBasis b2 = CellBasis::of(mesh, cell, 2);
  const QuadRule qc = cell_quadrature(mesh, cell);

  LocalElasticOperators ops;
  ops.num_faces = nf;
  ops.diameter = c.diameter;

  const Matrix m1 = gram_matrix(b1, qc);
  ops.strain_mass = Matrix::Zero(9, 9);
  ops.strain_mass.block(0, 0, 3, 3) = m1;
  ops.strain_mass.block(3, 3, 3, 3) = m1;
  ops.strain_mass.block(6, 6, 3, 3) = 2. * m1;
  ops.trace_mass = Matrix::Zero(9, 9);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) ops.trace_mass.block(3 * i, 3 * j, 3, 3) = m1;

  // Strain reconstruction: integration by parts against tau in P1(T; Sym).
  Matrix rhs = Matrix::Zero(9, n);
  for (const auto& q : qc) {
    const Vector m = b1.values(q.x);
    const auto g = b1.gradients(q.x);
    for (Index k = 0; k < 3; ++k)
      for (Index j = 0; j < 3; ++j) {
        const double wm = q.w * m[j];
        rhs(k, j) -= wm * g(k, 0);
        rhs(3 + k, 3 + j) -= wm * g(k, 1);
        rhs(6 + k, j) -= wm * g(k, 1);
        rhs(6 + k, 3 + j) -= wm * g(k, 0);
      }
  }
  std::vector<QuadRule> face_quads;
  std::vector<FaceBasis> face_bases;
  face_quads.reserve(nf);
  face_bases.reserve(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    face_quads.push_back(face_quadrature(mesh, c.faces[f]));
    face_bases.push_back(FaceBasis::of(mesh, c.faces[f], 1));
    const Vector2 nrm = mesh.normal(cell, f);
    const Index off = elastic_dofs::cell + elastic_dofs::face * static_cast<Index>(f);
    for (const auto& q : face_quads.back()) {
      const Vector m = b1.values(q.x);
      const Vector psi = face_bases.back().values(q.x);
      for (Index k = 0; k < 3; ++k)
        for (Index j = 0; j < 2; ++j) {
          const double v = q.w * psi[j] * m[k];
          rhs(k, off + j) += v * nrm.x();
          rhs(3 + k, off + 2 + j) += v * nrm.y();
          rhs(6 + k, off + j) += v * nrm.y();
          rhs(6 + k, off + 2 + j) += v * nrm.x();
        }
    }
  }
  ops.strain = solve_gram(ops.strain_mass, rhs);
  ops.divergence = ops.strain.topRows(3) + ops.strain.middleRows(3, 3);

  // Quadratic reconstruction: sym-gradient projection plus rigid-motion closure.
  auto sym_grad = [](const Eigen::Matrix<double, Eigen::Dynamic, 2>& g, Index a) {
    // (xx, yy, xy) of grad_s(m e_x) for a < 6, grad_s(m e_y) otherwise.
    return a < 6 ? Eigen::Vector3d(g(a, 0), 0., 0.5 * g(a, 1))
                 : Eigen::Vector3d(0., g(a - 6, 1), 0.5 * g(a - 6, 0));
  };
  const Eigen::Vector3d frob(1., 1., 2.);
  Matrix stiff = Matrix::Zero(12, 12);
  Matrix coupling = Matrix::Zero(12, 9);
  Matrix constraints = Matrix::Zero(3, 12);
  for (const auto& q : qc) {
    const Vector m1v = b1.values(q.x);
    const Vector m2v = b2.values(q.x);
    const auto g = b2.gradients(q.x);
    std::array<Eigen::Vector3d, 12> sg;
    for (Index a = 0; a < 12; ++a) sg[static_cast<std::size_t>(a)] = sym_grad(g, a);
    for (Index a = 0; a < 12; ++a) {
      const Eigen::Vector3d& ga = sg[static_cast<std::size_t>(a)];
      for (Index b = 0; b < 12; ++b) stiff(a, b) += q.w * ga.cwiseProduct(frob).dot(sg[static_cast<std::size_t>(b)]);
      for (Index k = 0; k < 3; ++k) {
        coupling(a, k) += q.w * m1v[k] * ga[0];
        coupling(a, 3 + k) += q.w * m1v[k] * ga[1];
        coupling(a, 6 + k) += q.w * m1v[k] * 2. * ga[2];
      }
    }
    for (Index j = 0; j < 6; ++j) {
      constraints(0, j) += q.w * m2v[j];
      constraints(1, 6 + j) += q.w * m2v[j];
      constraints(2, j) += 0.5 * q.w * g(j, 1);
      constraints(2, 6 + j) -= 0.5 * q.w * g(j, 0);
    }
  }
  Matrix closure = Matrix::Zero(3, n);
  for (const auto& q : qc) {
    const Vector m = b1.values(q.x);
    for (Index j = 0; j < 3; ++j) {
      closure(0, j) += q.w * m[j];
      closure(1, 3 + j) += q.w * m[j];
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    const Vector2 nrm = mesh.normal(cell, f);
    const Index off = elastic_dofs::cell + elastic_dofs::face * static_cast<Index>(f);
    for (const auto& q : face_quads[f]) {
      const Vector psi = face_bases[f].values(q.x);
      for (Index j = 0; j < 2; ++j) {
        closure(2, off + j) += 0.5 * q.w * psi[j] * nrm.y();
        closure(2, off + 2 + j) -= 0.5 * q.w * psi[j] * nrm.x();
      }
    }
  }
  Matrix bordered = Matrix::Zero(15, 15);
  bordered.topLeftCorner(12, 12) = stiff;
  bordered.topRightCorner(12, 3) = constraints.transpose();
  bordered.bottomLeftCorner(3, 12) = constraints;
  Matrix brhs(15, n);
  brhs.topRows(12) = coupling * ops.strain;
  brhs.bottomRows(3) = closure;
  Eigen::FullPivLU<Matrix> lu(bordered);
  if (!lu.isInvertible()) throw GeometryError("singular closure system in displacement reconstruction");
  ops.reconstruction = lu.solve(brhs).topRows(12);

  // Difference operators dT = pi_T(p - vT), dTF = pi_F(p - vF).
  const Matrix proj_t = solve_gram(m1, mass_matrix(b1, b2, qc)); // 3 x 6
  Matrix delta_t(6, n);
  delta_t.topRows(3) = proj_t * ops.reconstruction.topRows(6);
  delta_t.bottomRows(3) = proj_t * ops.reconstruction.bottomRows(6);
  delta_t.leftCols(6) -= Matrix::Identity(6, 6);

  ops.stabilization = Matrix::Zero(n, n);
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = mesh.face(c.faces[f]);
    const QuadRule& qf = face_quads[f];
    const FaceBasis& fb = face_bases[f];
    const Matrix mf = gram_matrix(fb, qf);
    const Matrix proj_f2 = solve_gram(mf, mass_matrix(fb, b2, qf)); // 2 x 6
    const Matrix proj_f1 = solve_gram(mf, mass_matrix(fb, b1, qf)); // 2 x 3
    const Index off = elastic_dofs::cell + elastic_dofs::face * static_cast<Index>(f);
    Matrix delta_f(4, n);
    delta_f.topRows(2) = proj_f2 * ops.reconstruction.topRows(6);
    delta_f.bottomRows(2) = proj_f2 * ops.reconstruction.bottomRows(6);
    delta_f.middleCols(off, 4) -= Matrix::Identity(4, 4);
    if (variant == Stabilization::face_difference) {
      delta_f.topRows(2) -= proj_f1 * delta_t.topRows(3);
      delta_f.bottomRows(2) -= proj_f1 * delta_t.bottomRows(3);
    }
    Matrix mff = Matrix::Zero(4, 4);
    mff.topLeftCorner(2, 2) = mf;
    mff.bottomRightCorner(2, 2) = mf;
    ops.stabilization.noalias() += delta_f.transpose() * mff * delta_f / face.diameter();
  }
  if (variant == Stabilization::cell_plus_face) {
    Matrix mtt = Matrix::Zero(6, 6);
    mtt.topLeftCorner(3, 3) = m1;
    mtt.bottomRightCorner(3, 3) = m1;
    ops.stabilization.noalias() += delta_t.transpose() * mtt * delta_t / (c.diameter * c.diameter);
  }
  ops.stabilization = 0.5 * (ops.stabilization + ops.stabilization.transpose()).eval();
  return ops;
}

/// Local interpolant (pi_T^1 w, (pi_F^1 w)_F) of a vector field.
inline Vector interpolate_displacement(const Mesh& mesh, Index cell, const std::function<Vector2(const Point&)>& w,
                                       int degree = 6) {
  const Cell& c = mesh.cell(cell);
  Vector dofs(elastic_dofs::local_size(c.num_faces()));
  dofs.head(6) = l2_project_vector(CellBasis::of(mesh, cell, 1), cell_quadrature(mesh, cell, degree), w);
  for (std::size_t f = 0; f < c.num_faces(); ++f)
    dofs.segment(elastic_dofs::cell + elastic_dofs::face * static_cast<Index>(f), 4) =
        l2_project_vector(FaceBasis::of(mesh, c.faces[f], 1), face_quadrature(mesh, c.faces[f], degree), w);
  return dofs;
}

/// Result of eliminating the leading `n_cell` unknowns of a local system
/// A x = b: the Schur complement on the trailing unknowns, the condensed
/// right-hand side, and the map x_T = recovery * x_F + cell_offset.
struct CondensedSystem {
  Matrix schur;
  Vector rhs;
  Matrix recovery;
  Vector cell_offset;

  Vector recover(const Eigen::Ref<const Vector>& face_values) const { return recovery * face_values + cell_offset; }
};

inline CondensedSystem static_condensation(const Matrix& a, Index n_cell, const Vector& b) {
  const Index nf = a.rows() - n_cell;
  Eigen::LLT<Matrix> llt(a.topLeftCorner(n_cell, n_cell));
  if (llt.info() != Eigen::Success) throw SolverError("singular cell block in static condensation");
  CondensedSystem out;
  out.recovery = -llt.solve(a.topRightCorner(n_cell, nf));
  out.cell_offset = llt.solve(b.head(n_cell));
  out.schur = a.bottomRightCorner(nf, nf) + a.bottomLeftCorner(nf, n_cell) * out.recovery;
  out.schur = 0.5 * (out.schur + out.schur.transpose()).eval();
  out.rhs = b.tail(nf) - a.bottomLeftCorner(nf, n_cell) * out.cell_offset;
  return out;
}

/// Condensation of g * A_T (no volume load). The recovery map does not
/// depend on g, and the Schur block scales linearly with it.
inline CondensedSystem condense_elastic(const Matrix& a_t, double g) {
  if (!(g > 0.)) throw SolverError("degradation must be positive for static condensation");
  return static_condensation(g * a_t, elastic_dofs::cell, Vector::Zero(a_t.rows()));
}

} // namespace hhofrac
