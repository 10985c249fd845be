#pragma once

// Local HHO operators for the crack phase field with P0 cell and face
// unknowns. Local DOF layout: [phi_T, phi_F0, ..., phi_F(nF-1)].

#include "common.hpp"
#include "elasticity.hpp"
#include "energy.hpp"
#include "mesh.hpp"

namespace hhofrac {

/// Geometry-only part of the local phase-field operators.
struct LocalPhaseOperators {
  double measure = 0.;
  /// 2 x (1 + nF): DOFs -> constant gradient of the affine reconstruction.
  Matrix gradient;
  /// Stabilization j_T.
  Matrix stabilization;
  /// |T| G^T G + J_T: diffusion and stabilization, independent of H.
  Matrix diffusion;

  Index size() const { return gradient.cols(); }
};

/// Gradient of the affine reconstruction: (1/|T|) sum_F |F| phi_F n_TF.
inline Matrix phase_gradient_operator(const Mesh& mesh, Index cell) {
  const Cell& c = mesh.cell(cell);
  Matrix g = Matrix::Zero(2, 1 + static_cast<Index>(c.num_faces()));
  for (std::size_t f = 0; f < c.num_faces(); ++f)
    g.col(1 + static_cast<Index>(f)) = mesh.face(c.faces[f]).measure / c.measure * mesh.normal(cell, f);
  return g;
}

/// Affine reconstruction evaluated at `x`.
inline double phase_reconstruction(const Mesh& mesh, Index cell, const Eigen::Ref<const Vector>& dofs,
                                   const Point& x) {
  const Vector2 grad = phase_gradient_operator(mesh, cell) * dofs;
  return dofs[0] + grad.dot(x - mesh.cell(cell).centroid);
}

/// j_T = sum_F (1 / (hT |F|)) r_F(phi) r_F(chi) with
/// r_F(phi) = int_F (p_T phi - phi_F) = |F| (phi_T + G phi . (xF - xT) - phi_F).
inline Matrix phase_stabilization(const Mesh& mesh, Index cell) {
  const Cell& c = mesh.cell(cell);
  const Index n = 1 + static_cast<Index>(c.num_faces());
  const Matrix g = phase_gradient_operator(mesh, cell);
  Matrix j = Matrix::Zero(n, n);
  for (std::size_t f = 0; f < c.num_faces(); ++f) {
    const Face& face = mesh.face(c.faces[f]);
    Eigen::RowVectorXd r = (face.midpoint - c.centroid).transpose() * g;
    r[0] += 1.;
    r[1 + static_cast<Index>(f)] -= 1.;
    r *= face.measure;
    j.noalias() += r.transpose() * r / (c.diameter * face.measure);
  }
  return j;
}

inline LocalPhaseOperators build_phase_operators(const Mesh& mesh, Index cell) {
  LocalPhaseOperators ops;
  ops.measure = mesh.cell(cell).measure;
  ops.gradient = phase_gradient_operator(mesh, cell);
  ops.stabilization = phase_stabilization(mesh, cell);
  ops.diffusion = ops.measure * ops.gradient.transpose() * ops.gradient + ops.stabilization;
  return ops;
}

/// Cell-cell reaction coefficient |T|/ell^2 + (2/(ell Gc)) int_T H.
inline double phase_reaction_weight(double measure, double history_integral, const MaterialParams& p) {
  const double w = measure / (p.ell * p.ell) + 2. / (p.ell * p.gc) * history_integral;
  if (!(w > 0.)) throw SolverError("non-positive phase-field reaction weight (corrupted history)");
  return w;
}

/// Local matrix b_T(H) = diffusion + stabilization + reaction on the cell DOF.
inline Matrix local_phase_matrix(const LocalPhaseOperators& ops, double history_integral, const MaterialParams& p) {
  Matrix b = ops.diffusion;
  b(0, 0) += phase_reaction_weight(ops.measure, history_integral, p);
  return b;
}

/// Backward-Euler mass coefficient eta / (ell Gc tau).
inline double phase_mass_coefficient(const MaterialParams& p, double tau) { return p.eta / (p.ell * p.gc * tau); }

/// Condenses the local backward-Euler system. The right-hand side acts on
/// the cell test function only: (2/(ell Gc)) int_T H + m |T| phi_prev.
inline CondensedSystem condense_phase(const LocalPhaseOperators& ops, double history_integral, double phi_prev,
                                      double mass_coefficient, const MaterialParams& p) {
  Matrix b = local_phase_matrix(ops, history_integral, p);
  b(0, 0) += mass_coefficient * ops.measure;
  Vector rhs = Vector::Zero(ops.size());
  rhs[0] = 2. / (p.ell * p.gc) * history_integral + mass_coefficient * ops.measure * phi_prev;
  return static_condensation(b, 1, rhs);
}

} // namespace hhofrac
