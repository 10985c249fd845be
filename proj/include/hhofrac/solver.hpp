#pragma once

// Global HHO phase-field fracture problem: DOF management, assembly of the
// statically condensed systems, the staggered iteration and reactions.

#include "common.hpp"
#include "elasticity.hpp"
#include "energy.hpp"
#include "history.hpp"
#include "linear_solver.hpp"
#include "mesh.hpp"
#include "phasefield.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hhofrac {

/// Prescribed displacement on the faces carrying one of `markers`.
struct DirichletCondition {
  std::string name;
  std::vector<int> markers;
  /// u_D(load, x).
  std::function<Vector2(double, const Point&)> value;

  bool contains(int m) const { return std::find(markers.begin(), markers.end(), m) != markers.end(); }
};

/// Dirichlet condition u_D = load * direction (rigid translation of the group).
inline DirichletCondition translation_condition(std::string name, std::vector<int> markers, Vector2 direction) {
  return {std::move(name), std::move(markers),
          [direction](double load, const Point&) -> Vector2 { return load * direction; }};
}

struct SolverConfig {
  /// Pseudo-time step.
  double tau = 1.;
  /// Threshold on the relative increments of u and phi.
  double tolerance = 1e-5;
  int max_iterations = 200;
  LinearSolverKind linear_solver = LinearSolverKind::direct;
  double linear_tolerance = 1e-10;
  HistoryComparison comparison = HistoryComparison::iterate;
  Stabilization stabilization = Stabilization::face_difference;
  HistoryStorage history_storage = HistoryStorage::polynomial;
  /// Accept a step whose staggered iteration hit `max_iterations`.
  bool accept_on_max = false;
  /// Diagnostic switch: keep H fixed during the staggered iteration.
  bool freeze_history = false;
  int threads = 1;

  void validate() const {
    if (!(tolerance > 0.)) throw ConfigError("staggered tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!(tau > 0.)) throw ConfigError("time step must be positive");
    if (!(linear_tolerance > 0.)) throw ConfigError("linear tolerance must be positive");
    if (threads < 1) throw ConfigError("threads must be at least 1");
  }
};

/// Global numbering. Displacement vectors hold 6 DOFs per cell followed by
/// 4 per face; phase vectors hold 1 per cell followed by 1 per face.
class DofMap {
public:
  DofMap() = default;
  DofMap(const Mesh& mesh, const std::vector<DirichletCondition>& conditions)
      : num_cells_(static_cast<Index>(mesh.num_cells())), num_faces_(static_cast<Index>(mesh.num_faces())) {
    dirichlet_group_.assign(mesh.num_faces(), -1);
    free_index_.assign(mesh.num_faces(), -1);
    for (std::size_t i = 0; i < mesh.num_faces(); ++i) {
      const Face& f = mesh.face(static_cast<Index>(i));
      if (!f.is_boundary()) continue;
      for (std::size_t g = 0; g < conditions.size(); ++g)
        if (conditions[g].contains(f.marker)) {
          if (dirichlet_group_[i] >= 0)
            throw ConfigError("face marker " + std::to_string(f.marker) + " assigned to two Dirichlet groups");
          dirichlet_group_[i] = static_cast<int>(g);
        }
    }
    for (std::size_t i = 0; i < mesh.num_faces(); ++i)
      if (dirichlet_group_[i] < 0) free_index_[i] = num_free_faces_++;
  }

  Index num_cells() const { return num_cells_; }
  Index num_faces() const { return num_faces_; }
  Index num_free_faces() const { return num_free_faces_; }
  Index displacement_size() const { return elastic_dofs::cell * num_cells_ + elastic_dofs::face * num_faces_; }
  Index phase_size() const { return num_cells_ + num_faces_; }
  Index condensed_size() const { return elastic_dofs::face * num_free_faces_; }

  Index cell_offset(Index c) const { return elastic_dofs::cell * c; }
  Index face_offset(Index f) const { return elastic_dofs::cell * num_cells_ + elastic_dofs::face * f; }
  Index phase_face(Index f) const { return num_cells_ + f; }

  bool is_dirichlet(Index f) const { return dirichlet_group_[static_cast<std::size_t>(f)] >= 0; }
  int dirichlet_group(Index f) const { return dirichlet_group_[static_cast<std::size_t>(f)]; }
  /// Position of a free face in the condensed system (in blocks of 4), or -1.
  Index free_index(Index f) const { return free_index_[static_cast<std::size_t>(f)]; }

private:
  Index num_cells_ = 0;
  Index num_faces_ = 0;
  Index num_free_faces_ = 0;
  std::vector<int> dirichlet_group_;
  std::vector<Index> free_index_;
};

struct StateFields {
  Vector displacement;
  Vector phase;
  HistoryState history;
  int step = 0;
  double time = 0.;
  double load = 0.;
};

struct StepReport {
  int iterations = 0;
  bool converged = false;
  double phase_min = 0.;
  double phase_max = 0.;
  /// Set when the phase field leaves [-0.05, 1.05].
  bool phase_out_of_range = false;
};

/// Relative increment test on both fields, with the <= convention.
inline bool convergence_check(const Vector& u_new, const Vector& u_old, const Vector& phi_new, const Vector& phi_old,
                              double tol) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double du = (u_new - u_old).norm() / std::max(u_new.norm(), eps);
  const double dphi = (phi_new - phi_old).norm() / std::max(phi_new.norm(), eps);
  return du <= tol && dphi <= tol;
}

namespace detail {

/// Sparse matrix with a fixed pattern and, per cell, the value slots of its
/// local condensed block (-1 for rows/columns eliminated by Dirichlet data).
struct FixedPattern {
  SparseMatrix matrix;
  std::vector<std::vector<Index>> slots;

  void build(Index size, const std::vector<std::vector<Index>>& cell_dofs) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& dofs : cell_dofs)
      for (Index i : dofs)
        for (Index j : dofs)
          if (i >= 0 && j >= 0) triplets.emplace_back(i, j, 0.);
    matrix.resize(size, size);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    matrix.makeCompressed();
    slots.resize(cell_dofs.size());
    const auto* outer = matrix.outerIndexPtr();
    const auto* inner = matrix.innerIndexPtr();
    for (std::size_t c = 0; c < cell_dofs.size(); ++c) {
      const auto& dofs = cell_dofs[c];
      const std::size_t n = dofs.size();
      slots[c].assign(n * n, -1);
      for (std::size_t j = 0; j < n; ++j) {
        if (dofs[j] < 0) continue;
        const auto* begin = inner + outer[dofs[j]];
        const auto* end = inner + outer[dofs[j] + 1];
        for (std::size_t i = 0; i < n; ++i) {
          if (dofs[i] < 0) continue;
          const auto* it = std::lower_bound(begin, end, static_cast<int>(dofs[i]));
          slots[c][j * n + i] = static_cast<Index>(it - inner);
        }
      }
    }
  }

  void zero() { std::fill(matrix.valuePtr(), matrix.valuePtr() + matrix.nonZeros(), 0.); }

  /// Adds `scale * block` (column-major local indexing) for cell `c`.
  void add(std::size_t c, const Matrix& block, double scale) {
    double* values = matrix.valuePtr();
    const auto& s = slots[c];
    const auto n = static_cast<std::size_t>(block.rows());
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i)
        if (const Index k = s[j * n + i]; k >= 0)
          values[k] += scale * block(static_cast<Index>(i), static_cast<Index>(j));
  }
};

} // namespace detail

class FractureProblem {
public:
  FractureProblem(Mesh mesh, MaterialParams params, SolverConfig config, std::vector<DirichletCondition> conditions)
      : mesh_(std::move(mesh)), params_(params), config_(config), conditions_(std::move(conditions)),
        dofs_(mesh_, conditions_), geometry_(mesh_),
        elastic_solver_(config_.linear_solver, config_.linear_tolerance),
        phase_solver_(config_.linear_solver, config_.linear_tolerance) {
    params_.validate();
    config_.validate();
#ifdef _OPENMP
    omp_set_num_threads(config_.threads);
#endif
    const auto nc = static_cast<Index>(mesh_.num_cells());
    elastic_.resize(mesh_.num_cells());
    elastic_matrix_.resize(mesh_.num_cells());
    elastic_condensed_.resize(mesh_.num_cells());
    phase_.resize(mesh_.num_cells());
#pragma omp parallel for schedule(dynamic, 64)
    for (Index c = 0; c < nc; ++c) {
      const auto i = static_cast<std::size_t>(c);
      elastic_[i] = build_elastic_operators(mesh_, c, config_.stabilization);
      elastic_matrix_[i] = elastic_[i].matrix(params_);
      elastic_condensed_[i] = condense_elastic(elastic_matrix_[i], 1.);
      phase_[i] = build_phase_operators(mesh_, c);
    }
    std::vector<std::vector<Index>> elastic_dofs(mesh_.num_cells()), phase_dofs(mesh_.num_cells());
    for (Index c = 0; c < nc; ++c) {
      const Cell& cell = mesh_.cell(c);
      auto& ed = elastic_dofs[static_cast<std::size_t>(c)];
      auto& pd = phase_dofs[static_cast<std::size_t>(c)];
      for (Index f : cell.faces) {
        const Index fi = dofs_.free_index(f);
        for (Index k = 0; k < elastic_dofs::face; ++k) ed.push_back(fi < 0 ? -1 : elastic_dofs::face * fi + k);
        pd.push_back(f);
      }
    }
    elastic_pattern_.build(dofs_.condensed_size(), elastic_dofs);
    phase_pattern_.build(dofs_.num_faces(), phase_dofs);
  }

  const Mesh& mesh() const { return mesh_; }
  const MaterialParams& params() const { return params_; }
  const SolverConfig& config() const { return config_; }
  const DofMap& dofs() const { return dofs_; }
  const HistoryGeometry& history_geometry() const { return geometry_; }
  const std::vector<DirichletCondition>& conditions() const { return conditions_; }
  const LocalElasticOperators& elastic_operators(Index c) const { return elastic_[static_cast<std::size_t>(c)]; }
  const Matrix& elastic_matrix(Index c) const { return elastic_matrix_[static_cast<std::size_t>(c)]; }
  const LocalPhaseOperators& phase_operators(Index c) const { return phase_[static_cast<std::size_t>(c)]; }
  const LinearSolveStats& elastic_solve_stats() const { return elastic_solver_.last_stats(); }
  const LinearSolveStats& phase_solve_stats() const { return phase_solver_.last_stats(); }

  StateFields initial_state() const {
    StateFields s;
    s.displacement = Vector::Zero(dofs_.displacement_size());
    s.phase = Vector::Zero(dofs_.phase_size());
    s.history = HistoryState(geometry_, config_.history_storage);
    return s;
  }

  /// Local displacement DOFs of `cell` gathered from a global vector.
  Vector local_displacement(Index cell, const Vector& u) const {
    const Cell& c = mesh_.cell(cell);
    Vector out(elastic_dofs::local_size(c.num_faces()));
    out.head(elastic_dofs::cell) = u.segment(dofs_.cell_offset(cell), elastic_dofs::cell);
    for (std::size_t f = 0; f < c.num_faces(); ++f)
      out.segment(elastic_dofs::cell + elastic_dofs::face * static_cast<Index>(f), elastic_dofs::face) =
          u.segment(dofs_.face_offset(c.faces[f]), elastic_dofs::face);
    return out;
  }

  Vector local_phase(Index cell, const Vector& phi) const {
    const Cell& c = mesh_.cell(cell);
    Vector out(1 + static_cast<Index>(c.num_faces()));
    out[0] = phi[cell];
    for (std::size_t f = 0; f < c.num_faces(); ++f) out[1 + static_cast<Index>(f)] = phi[dofs_.phase_face(c.faces[f])];
    return out;
  }

  /// Face values pi_F^1 u_D on every Dirichlet face, in global layout
  /// (zero elsewhere, cell entries untouched).
  Vector dirichlet_values(double load) const {
    Vector u = Vector::Zero(dofs_.displacement_size());
    for (std::size_t i = 0; i < mesh_.num_faces(); ++i) {
      const auto f = static_cast<Index>(i);
      if (!dofs_.is_dirichlet(f)) continue;
      const auto& cond = conditions_[static_cast<std::size_t>(dofs_.dirichlet_group(f))];
      u.segment(dofs_.face_offset(f), elastic_dofs::face) =
          l2_project_vector(FaceBasis::of(mesh_, f, 1), face_quadrature(mesh_, f, 6),
                            [&](const Point& x) { return cond.value(load, x); });
    }
    return u;
  }

  /// Cell degradation values g(phi_T).
  std::vector<double> degradation_values(const Vector& phase) const {
    std::vector<double> g(mesh_.num_cells());
    for (std::size_t c = 0; c < g.size(); ++c) g[c] = degradation(phase[static_cast<Index>(c)], params_);
    return g;
  }

  /// Mechanical equilibrium with degradation g(phi_T) and Dirichlet data at
  /// `load`. Returns the full displacement vector (cells and faces).
  Vector solve_mechanical(const Vector& phase, double load) {
    return solve_mechanical_with(degradation_values(phase), dirichlet_values(load));
  }

  /// Same, with explicit cell weights and Dirichlet face values. `guess`
  /// (full layout) warm-starts the solve; `reuse_factor` allows the linear
  /// solver to precondition with its previous factorization.
  Vector solve_mechanical_with(const std::vector<double>& g, const Vector& dirichlet, const Vector* guess = nullptr,
                               bool reuse_factor = false) {
    const auto nc = static_cast<Index>(mesh_.num_cells());
    elastic_pattern_.zero();
    Vector rhs = Vector::Zero(dofs_.condensed_size());
    for (Index c = 0; c < nc; ++c) {
      const auto i = static_cast<std::size_t>(c);
      if (!(g[i] > 0.)) throw SolverError("degradation must be positive for static condensation");
      const Matrix& schur = elastic_condensed_[i].schur;
      elastic_pattern_.add(i, schur, g[i]);
      const Cell& cell = mesh_.cell(c);
      for (std::size_t fa = 0; fa < cell.num_faces(); ++fa) {
        const Index fi = dofs_.free_index(cell.faces[fa]);
        if (fi < 0) continue;
        for (std::size_t fb = 0; fb < cell.num_faces(); ++fb) {
          if (!dofs_.is_dirichlet(cell.faces[fb])) continue;
          const auto block = schur.block(4 * static_cast<Index>(fa), 4 * static_cast<Index>(fb), 4, 4);
          rhs.segment(4 * fi, 4) -= g[i] * block * dirichlet.segment(dofs_.face_offset(cell.faces[fb]), 4);
        }
      }
    }
    Vector start;
    if (guess != nullptr) {
      start.resize(dofs_.condensed_size());
      for (Index f = 0; f < dofs_.num_faces(); ++f)
        if (const Index fi = dofs_.free_index(f); fi >= 0) start.segment(4 * fi, 4) = guess->segment(dofs_.face_offset(f), 4);
    }
    const Vector free = elastic_solver_.solve(elastic_pattern_.matrix, rhs, guess ? &start : nullptr, reuse_factor);
    Vector u = dirichlet;
    for (Index f = 0; f < dofs_.num_faces(); ++f)
      if (const Index fi = dofs_.free_index(f); fi >= 0) u.segment(dofs_.face_offset(f), 4) = free.segment(4 * fi, 4);
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < nc; ++c) {
      const Cell& cell = mesh_.cell(c);
      Vector faces(4 * static_cast<Index>(cell.num_faces()));
      for (std::size_t fa = 0; fa < cell.num_faces(); ++fa)
        faces.segment(4 * static_cast<Index>(fa), 4) = u.segment(dofs_.face_offset(cell.faces[fa]), 4);
      u.segment(dofs_.cell_offset(c), elastic_dofs::cell) = elastic_condensed_[static_cast<std::size_t>(c)].recovery * faces;
    }
    return u;
  }

  /// Strain reconstruction coefficients of `cell` for the displacement `u`.
  StrainCoeffs strain(Index cell, const Vector& u) const {
    return elastic_operators(cell).strain * local_displacement(cell, u);
  }

  /// History update for every cell from the displacement `u`.
  HistoryState updated_history(const HistoryState& current, const HistoryState& reference, const Vector& u) const {
    HistoryState next = current;
    const auto nc = static_cast<Index>(mesh_.num_cells());
#pragma omp parallel for schedule(static)
    for (Index c = 0; c < nc; ++c) update_history(next, reference, geometry_, c, strain(c, u), params_);
    return next;
  }

  /// Backward-Euler phase-field solve with history `h` and previous-step
  /// phase `phase_prev` (only its cell values matter). Only the cell-cell
  /// entry of the local matrix depends on H, so the Schur complement is the
  /// rank-one update D_FF - D_FT D_TF / d_TT of the fixed diffusion block.
  Vector solve_phase(const HistoryState& h, const Vector& phase_prev, const Vector* guess = nullptr,
                     bool reuse_factor = false) {
    const auto nc = static_cast<Index>(mesh_.num_cells());
    const double mass = phase_mass_coefficient(params_, config_.tau);
    const double source_scale = 2. / (params_.ell * params_.gc);
    phase_pattern_.zero();
    Vector rhs = Vector::Zero(dofs_.num_faces());
    std::vector<double> pivot(mesh_.num_cells()), source(mesh_.num_cells());
    for (Index c = 0; c < nc; ++c) {
      const auto i = static_cast<std::size_t>(c);
      const LocalPhaseOperators& ops = phase_[i];
      const double hint = h.integral(geometry_, c);
      pivot[i] = ops.diffusion(0, 0) + phase_reaction_weight(ops.measure, hint, params_) + mass * ops.measure;
      source[i] = source_scale * hint + mass * ops.measure * phase_prev[c];
      const Index nf = ops.size() - 1;
      const auto coupling = ops.diffusion.col(0).tail(nf);
      phase_pattern_.add(i, ops.diffusion.bottomRightCorner(nf, nf) - coupling * coupling.transpose() / pivot[i], 1.);
      const Cell& cell = mesh_.cell(c);
      for (Index fa = 0; fa < nf; ++fa) rhs[cell.faces[static_cast<std::size_t>(fa)]] -= coupling[fa] * source[i] / pivot[i];
    }
    Vector start;
    if (guess != nullptr) start = guess->tail(dofs_.num_faces());
    const Vector faces = phase_solver_.solve(phase_pattern_.matrix, rhs, guess ? &start : nullptr, reuse_factor);
    Vector phi(dofs_.phase_size());
    phi.tail(dofs_.num_faces()) = faces;
    for (Index c = 0; c < nc; ++c) {
      const auto i = static_cast<std::size_t>(c);
      const Cell& cell = mesh_.cell(c);
      double acc = source[i];
      for (std::size_t fa = 0; fa < cell.num_faces(); ++fa)
        acc -= phase_[i].diffusion(0, 1 + static_cast<Index>(fa)) * faces[cell.faces[fa]];
      phi[c] = acc / pivot[i];
    }
    return phi;
  }

  /// Advances `state` to the next pseudo-time step with boundary load `load`.
  StepReport staggered_step(StateFields& state, double load) {
    StepReport report;
    const HistoryState& committed = state.history;
    Vector phi_it = state.phase;
    Vector u_prev = state.displacement;
    HistoryState h_it = committed;
    const Vector dirichlet = dirichlet_values(load);
    for (int m = 1; m <= config_.max_iterations; ++m) {
      // The first solve of a step refactorizes, so a step depends only on
      // the state it starts from.
      const bool reuse = m > 1;
      Vector u = solve_mechanical_with(degradation_values(phi_it), dirichlet, &u_prev, reuse);
      HistoryState h_new = config_.freeze_history
                               ? h_it
                               : updated_history(h_it, config_.comparison == HistoryComparison::iterate ? h_it : committed, u);
      Vector phi = solve_phase(h_new, state.phase, &phi_it, reuse);
      const bool done = convergence_check(u, u_prev, phi, phi_it, config_.tolerance);
      u_prev = std::move(u);
      phi_it = std::move(phi);
      h_it = std::move(h_new);
      report.iterations = m;
      if (done) {
        report.converged = true;
        break;
      }
    }
    if (!report.converged && !config_.accept_on_max)
      throw SolverError("staggered iteration did not converge in " + std::to_string(config_.max_iterations) +
                        " iterations at step " + std::to_string(state.step + 1));
    state.displacement = std::move(u_prev);
    state.phase = std::move(phi_it);
    state.history = std::move(h_it);
    state.step += 1;
    state.time += config_.tau;
    state.load = load;
    report.phase_min = state.phase.minCoeff();
    report.phase_max = state.phase.maxCoeff();
    report.phase_out_of_range = report.phase_min < -0.05 || report.phase_max > 1.05;
    return report;
  }

  /// Residual of the global elastic form against the constant face modes:
  /// sum over faces of the group of sum_T g(phi_T) a_T(u_T, e_F).
  Vector2 reaction_force(const StateFields& state, const std::vector<int>& markers) const {
    Vector2 force = Vector2::Zero();
    bool any = false;
    const std::vector<double> g = degradation_values(state.phase);
    for (std::size_t i = 0; i < mesh_.num_faces(); ++i) {
      const Face& f = mesh_.face(static_cast<Index>(i));
      if (!f.is_boundary() || std::find(markers.begin(), markers.end(), f.marker) == markers.end()) continue;
      any = true;
      const Index c = f.cells[0];
      const Index local = mesh_.local_face_index(c, static_cast<Index>(i));
      const Vector r = g[static_cast<std::size_t>(c)] * elastic_matrix(c) * local_displacement(c, state.displacement);
      const Index off = elastic_dofs::cell + elastic_dofs::face * local;
      force += Vector2(r[off], r[off + 2]);
    }
    if (!any) throw ConfigError("boundary group has no faces");
    return force;
  }

  /// Total measure of the boundary faces carrying one of `markers`.
  double boundary_length(const std::vector<int>& markers) const {
    double len = 0.;
    for (const auto& f : mesh_.faces())
      if (f.is_boundary() && std::find(markers.begin(), markers.end(), f.marker) != markers.end()) len += f.measure;
    return len;
  }

private:
  Mesh mesh_;
  MaterialParams params_;
  SolverConfig config_;
  std::vector<DirichletCondition> conditions_;
  DofMap dofs_;
  HistoryGeometry geometry_;
  std::vector<LocalElasticOperators> elastic_;
  std::vector<Matrix> elastic_matrix_;
  std::vector<CondensedSystem> elastic_condensed_;
  std::vector<LocalPhaseOperators> phase_;
  detail::FixedPattern elastic_pattern_;
  detail::FixedPattern phase_pattern_;
  SpdSolver elastic_solver_;
  SpdSolver phase_solver_;
};

} // namespace hhofrac
