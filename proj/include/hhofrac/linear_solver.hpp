#pragma once

// Sparse symmetric positive definite solves for the condensed systems.

#include "common.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#ifdef HHOFRAC_HAS_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include <cmath>
#include <memory>
#include <string>
#include <string_view>

namespace hhofrac {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class LinearSolverKind { direct, cg };

inline LinearSolverKind parse_linear_solver(std::string_view s) {
  if (s == "direct") return LinearSolverKind::direct;
  if (s == "cg") return LinearSolverKind::cg;
  throw ConfigError("unknown linear solver '" + std::string(s) + "' (direct | cg)");
}

inline std::string_view to_string(LinearSolverKind k) { return k == LinearSolverKind::direct ? "direct" : "cg"; }

struct LinearSolveStats {
  double relative_residual = 0.;
  int iterations = 0;
  bool reused_factor = false;
};

/// Solver for a sequence of SPD systems sharing one sparsity pattern. The
/// symbolic analysis of the direct solver is done once and reused.
class SpdSolver {
public:
  explicit SpdSolver(LinearSolverKind kind = LinearSolverKind::direct, double tolerance = 1e-10)
      : kind_(kind), tolerance_(tolerance) {}

  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;
  SpdSolver(SpdSolver&&) = default;
  SpdSolver& operator=(SpdSolver&&) = default;

  LinearSolverKind kind() const { return kind_; }
  const LinearSolveStats& last_stats() const { return stats_; }

  /// Solves a x = b. `guess` warm-starts the iterative paths. With
  /// `reuse_factor`, the direct solver first tries conjugate gradients
  /// preconditioned by the factorization of an earlier matrix with the same
  /// pattern, and refactorizes only if that stalls.
  Vector solve(const SparseMatrix& a, const Vector& b, const Vector* guess = nullptr, bool reuse_factor = false) {
    if (a.rows() == 0) return Vector();
    const double bnorm = b.norm();
    stats_ = {};
    if (bnorm == 0.) return Vector::Zero(b.size());
    Vector x;
    if (kind_ == LinearSolverKind::direct) {
      const bool same_pattern = direct_ && a.rows() == analyzed_rows_ && a.nonZeros() == analyzed_nnz_;
      if (reuse_factor && same_pattern && factorized_ && preconditioned_cg(a, b, guess, x)) {
        stats_.reused_factor = true;
      } else {
        if (!same_pattern) {
          direct_ = std::make_unique<DirectSolver>();
          direct_->analyzePattern(a);
          analyzed_rows_ = a.rows();
          analyzed_nnz_ = a.nonZeros();
        }
        factorized_ = false;
        direct_->factorize(a);
        if (direct_->info() != Eigen::Success) throw SolverError("sparse Cholesky factorization failed (matrix not SPD)");
        factorized_ = true;
        x = direct_->solve(b);
        // Iterative refinement recovers accuracy lost to the degradation floor.
        Vector r = b - a * x;
        for (int it = 0; it < 3 && r.norm() > tolerance_ * bnorm; ++it) {
          x += direct_->solve(r);
          r = b - a * x;
          ++stats_.iterations;
        }
        stats_.relative_residual = r.norm() / bnorm;
      }
    } else {
      Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
      cg.setTolerance(tolerance_);
      cg.setMaxIterations(std::max<Index>(1000, 10 * a.rows()));
      cg.compute(a);
      if (guess != nullptr && guess->size() == b.size())
        x = cg.solveWithGuess(b, *guess);
      else
        x = cg.solve(b);
      if (cg.info() != Eigen::Success) throw SolverError("conjugate gradient did not converge");
      stats_.iterations = static_cast<int>(cg.iterations());
      stats_.relative_residual = (b - a * x).norm() / bnorm;
    }
    if (!x.allFinite()) throw SolverError("linear solver produced non-finite values");
    return x;
  }

  /// Iteration cap of the preconditioned solve before refactorizing.
  static constexpr int reuse_iteration_limit = 25;

private:
#ifdef HHOFRAC_HAS_CHOLMOD
  using DirectSolver = Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower>;
#else
  using DirectSolver = Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower>;
#endif
  LinearSolverKind kind_;
  double tolerance_;
  bool preconditioned_cg(const SparseMatrix& a, const Vector& b, const Vector* guess, Vector& x) {
    const double bnorm = b.norm();
    x = guess != nullptr && guess->size() == b.size() ? *guess : Vector::Zero(b.size());
    Vector r = b - a * x;
    double rnorm = r.norm();
    int it = 0;
    if (rnorm > tolerance_ * bnorm) {
      Vector z = direct_->solve(r);
      Vector p = z;
      double rz = r.dot(z);
      for (it = 1; it <= reuse_iteration_limit; ++it) {
        const Vector ap = a * p;
        const double pap = p.dot(ap);
        if (!(pap > 0.)) return false;
        const double alpha = rz / pap;
        x += alpha * p;
        r -= alpha * ap;
        rnorm = r.norm();
        if (rnorm <= tolerance_ * bnorm) break;
        z = direct_->solve(r);
        const double rz_new = r.dot(z);
        p = z + (rz_new / rz) * p;
        rz = rz_new;
      }
      if (it > reuse_iteration_limit) return false;
    }
    stats_.iterations = it;
    stats_.relative_residual = rnorm / bnorm;
    return x.allFinite();
  }

  std::unique_ptr<DirectSolver> direct_;
  bool factorized_ = false;
  Index analyzed_rows_ = -1;
  Index analyzed_nnz_ = -1;
  LinearSolveStats stats_;
};

} // namespace hhofrac
