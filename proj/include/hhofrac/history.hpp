#pragma once

// Discrete history field. Each cell stores the strain reconstruction that
// produced the largest driving energy so far (or, alternatively, the
// running maximum at every quadrature node) plus a constant seed used to
// represent a notch without cutting the mesh.

#include "basis.hpp"
#include "common.hpp"
#include "elasticity.hpp"
#include "energy.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

namespace hhofrac {

/// Reference for the replacement test: the previous staggered iterate of the
/// current step, or the last accepted step.
enum class HistoryComparison { iterate, step };

/// Polynomial storage keeps a strain field per cell; node storage keeps the
/// history value at each cell quadrature node.
enum class HistoryStorage { polynomial, nodes };

inline HistoryComparison parse_comparison(std::string_view s) {
  if (s == "iterate") return HistoryComparison::iterate;
  if (s == "step") return HistoryComparison::step;
  throw ConfigError("unknown history comparison '" + std::string(s) + "' (iterate | step)");
}

inline HistoryStorage parse_history_storage(std::string_view s) {
  if (s == "polynomial") return HistoryStorage::polynomial;
  if (s == "nodes") return HistoryStorage::nodes;
  throw ConfigError("unknown history storage '" + std::string(s) + "' (polynomial | nodes)");
}

inline std::string_view to_string(HistoryComparison c) { return c == HistoryComparison::iterate ? "iterate" : "step"; }
inline std::string_view to_string(HistoryStorage s) { return s == HistoryStorage::polynomial ? "polynomial" : "nodes"; }

/// Per-cell quadrature rules and P1 bases used to evaluate strain energies.
class HistoryGeometry {
public:
  HistoryGeometry() = default;
  explicit HistoryGeometry(const Mesh& mesh) {
    quads_.reserve(mesh.num_cells());
    bases_.reserve(mesh.num_cells());
    measures_.reserve(mesh.num_cells());
    for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
      const auto c = static_cast<Index>(i);
      quads_.push_back(cell_quadrature(mesh, c));
      bases_.push_back(CellBasis::of(mesh, c, 1));
      measures_.push_back(mesh.cell(c).measure);
    }
  }

  std::size_t num_cells() const { return quads_.size(); }
  const QuadRule& quadrature(Index cell) const { return quads_[static_cast<std::size_t>(cell)]; }
  const CellBasis& basis(Index cell) const { return bases_[static_cast<std::size_t>(cell)]; }
  double measure(Index cell) const { return measures_[static_cast<std::size_t>(cell)]; }

  /// Driving energy of a strain field at each quadrature node of `cell`.
  std::vector<double> node_energies(Index cell, const StrainCoeffs& strain, const MaterialParams& p) const {
    const QuadRule& q = quadrature(cell);
    std::vector<double> out(q.size());
    for (std::size_t k = 0; k < q.size(); ++k)
      out[k] = driving_energy(evaluate_strain(basis(cell), strain, q.nodes[k].x), p);
    return out;
  }

private:
  std::vector<QuadRule> quads_;
  std::vector<CellBasis> bases_;
  std::vector<double> measures_;
};

struct CellHistory {
  StrainCoeffs strain = StrainCoeffs::Zero();
  /// Strain energy at each quadrature node (driving energy of `strain`, or
  /// the running maxima with node storage).
  std::vector<double> nodes;
  /// Maximum of `nodes`.
  double strain_max = 0.;
  /// Quadrature integral of `nodes` over the cell.
  double strain_integral = 0.;
  /// Constant initial history (notch seed).
  double seed = 0.;
};

class HistoryState {
public:
  HistoryState() = default;
  HistoryState(const HistoryGeometry& geometry, HistoryStorage storage) : storage_(storage) {
    cells_.resize(geometry.num_cells());
    for (std::size_t i = 0; i < cells_.size(); ++i)
      cells_[i].nodes.assign(geometry.quadrature(static_cast<Index>(i)).size(), 0.);
  }

  HistoryStorage storage() const { return storage_; }
  std::size_t num_cells() const { return cells_.size(); }
  const CellHistory& cell(Index c) const { return cells_[static_cast<std::size_t>(c)]; }
  CellHistory& cell(Index c) { return cells_[static_cast<std::size_t>(c)]; }
  const std::vector<CellHistory>& cells() const { return cells_; }

  /// Maximum over the quadrature nodes of H_T = strain energy + seed.
  double max_value(Index c) const { return cell(c).strain_max + cell(c).seed; }

  /// int_T H_T, the quantity entering the phase-field reaction and source.
  double integral(const HistoryGeometry& g, Index c) const {
    return cell(c).strain_integral + cell(c).seed * g.measure(c);
  }

  /// Value of H_T at quadrature node `k`.
  double node_value(Index c, std::size_t k) const { return cell(c).nodes[k] + cell(c).seed; }

  /// Mean of H_T over the cell.
  double mean(const HistoryGeometry& g, Index c) const { return integral(g, c) / g.measure(c); }

private:
  HistoryStorage storage_ = HistoryStorage::polynomial;
  std::vector<CellHistory> cells_;
};

namespace detail {

inline void refresh_cell_summary(const HistoryGeometry& g, Index c, CellHistory& h) {
  const QuadRule& q = g.quadrature(c);
  h.strain_max = h.nodes.empty() ? 0. : *std::max_element(h.nodes.begin(), h.nodes.end());
  h.strain_integral = 0.;
  for (std::size_t k = 0; k < q.size(); ++k) h.strain_integral += q.nodes[k].w * h.nodes[k];
}

} // namespace detail

/// Updates the history of `cell` in `state` (which holds the previous
/// iterate) from the new strain reconstruction. `reference` is the state
/// compared against: the previous iterate itself, or the last accepted step.
/// Returns true when the stored values changed.
inline bool update_history(HistoryState& state, const HistoryState& reference, const HistoryGeometry& g, Index cell,
                           const StrainCoeffs& new_strain, const MaterialParams& p) {
  CellHistory& h = state.cell(cell);
  const CellHistory& ref = reference.cell(cell);
  const std::vector<double> energies = g.node_energies(cell, new_strain, p);
  if (state.storage() == HistoryStorage::polynomial) {
    const double new_max = *std::max_element(energies.begin(), energies.end());
    if (!(new_max > ref.strain_max)) return false;
    h.strain = new_strain;
    h.nodes = energies;
    detail::refresh_cell_summary(g, cell, h);
    return true;
  }
  bool changed = false;
  for (std::size_t k = 0; k < energies.size(); ++k)
    if (energies[k] > ref.nodes[k] && energies[k] != h.nodes[k]) {
      h.nodes[k] = energies[k];
      changed = true;
    }
  if (changed) {
    h.strain = new_strain;
    detail::refresh_cell_summary(g, cell, h);
  }
  return changed;
}

/// Recomputes the cached node values and summaries from the stored strains
/// (polynomial storage only). Used after loading a checkpoint and in checks.
inline void recompute_history(HistoryState& state, const HistoryGeometry& g, const MaterialParams& p) {
  if (state.storage() != HistoryStorage::polynomial) return;
  for (std::size_t i = 0; i < state.num_cells(); ++i) {
    const auto c = static_cast<Index>(i);
    state.cell(c).nodes = g.node_energies(c, state.cell(c).strain, p);
    detail::refresh_cell_summary(g, c, state.cell(c));
  }
}

inline double distance_to_segment(const Point& x, const Point& a, const Point& b) {
  const Vector2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0. ? std::clamp((x - a).dot(ab) / len2, 0., 1.) : 0.;
  return (x - (a + t * ab)).norm();
}

/// Seeds H0_T = B Gc / (2 ell) max(0, 1 - dist(xT, segment) / halfwidth);
/// the default half-width ell / 2 gives a profile of total width ell.
inline HistoryState init_history_notch(const Mesh& mesh, const HistoryGeometry& g, const Point& a, const Point& b,
                                       double amplitude, const MaterialParams& p,
                                       HistoryStorage storage = HistoryStorage::polynomial, double halfwidth = -1.) {
  if (!(amplitude > 0.)) throw ConfigError("notch history amplitude must be positive");
  if (halfwidth <= 0.) halfwidth = 0.5 * p.ell;
  HistoryState state(g, storage);
  const double peak = amplitude * p.gc / (2. * p.ell);
  for (std::size_t i = 0; i < mesh.num_cells(); ++i) {
    const auto c = static_cast<Index>(i);
    const double d = distance_to_segment(mesh.cell(c).centroid, a, b);
    state.cell(c).seed = peak * std::max(0., 1. - d / halfwidth);
  }
  return state;
}

} // namespace hhofrac
