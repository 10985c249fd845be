#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace hhofrac;

namespace {

StrainCoeffs random_coeffs(std::mt19937& rng, double scale) {
  std::uniform_real_distribution<double> d(-1., 1.);
  StrainCoeffs c;
  for (Index i = 0; i < c.size(); ++i) c[i] = scale * d(rng);
  return c;
}

StrainCoeffs constant_strain(const Strain2& e) {
  StrainCoeffs c = StrainCoeffs::Zero();
  c[0] = e.xx;
  c[3] = e.yy;
  c[6] = e.xy;
  return c;
}

// Brute force over quadrature nodes, independent of the cached summaries.
double max_node_energy(const Mesh& m, Index cell, const StrainCoeffs& s, const MaterialParams& p) {
  const CellBasis b = CellBasis::of(m, cell, 1);
  double best = 0.;
  for (const auto& q : cell_quadrature(m, cell)) best = std::max(best, driving_energy(evaluate_strain(b, s, q.x), p));
  return best;
}

} // namespace

TEST(History, DominatingStrainReplacesStored) {
  const Mesh m = fixtures::single_cell(fixtures::regular_polygon(6, 0.1));
  const HistoryGeometry g(m);
  const MaterialParams p;
  HistoryState s(g, HistoryStorage::polynomial);
  ASSERT_TRUE(update_history(s, s, g, 0, constant_strain({1e-3, 0., 0.}), p));
  const HistoryState before = s;
  EXPECT_TRUE(update_history(s, before, g, 0, constant_strain({2e-3, 0., 0.}), p));
  EXPECT_EQ(s.cell(0).strain, constant_strain({2e-3, 0., 0.}));
  EXPECT_GT(s.max_value(0), before.max_value(0));
}

TEST(History, ZeroStrainLeavesStoredUnchanged) {
  const Mesh m = fixtures::unit_square();
  const HistoryGeometry g(m);
  const MaterialParams p;
  HistoryState s(g, HistoryStorage::polynomial);
  update_history(s, s, g, 0, constant_strain({1e-3, 5e-4, 1e-4}), p);
  const HistoryState before = s;
  EXPECT_FALSE(update_history(s, before, g, 0, StrainCoeffs::Zero(), p));
  EXPECT_EQ(s.cell(0).strain, before.cell(0).strain);
  EXPECT_EQ(s.max_value(0), before.max_value(0));
}

TEST(History, DecisionByMaxOverNodes) {
  fixtures::PolygonGenerator gen(12);
  std::mt19937 rng(13);
  for (const auto f : {Formulation::isotropic, Formulation::hybrid_spectral, Formulation::hybrid_voldev}) {
    MaterialParams p;
    p.formulation = f;
    for (int trial = 0; trial < 200; ++trial) {
      const Mesh m = fixtures::single_cell(trial % 2 ? gen.quadrilateral() : gen.hexagon());
      const HistoryGeometry g(m);
      HistoryState s(g, HistoryStorage::polynomial);
      const StrainCoeffs first = random_coeffs(rng, 1e-3), second = random_coeffs(rng, 1e-3);
      update_history(s, s, g, 0, first, p);
      const HistoryState ref = s;
      const bool replaced = update_history(s, ref, g, 0, second, p);
      const bool expected = max_node_energy(m, 0, second, p) > max_node_energy(m, 0, first, p);
      EXPECT_EQ(replaced, expected);
      EXPECT_EQ(s.cell(0).strain, expected ? second : first);
      EXPECT_GE(s.max_value(0), ref.max_value(0));
    }
  }
}

TEST(History, NodeStorageKeepsPointwiseMaxima) {
  const Mesh m = fixtures::single_cell(fixtures::regular_polygon(5, 0.2));
  const HistoryGeometry g(m);
  MaterialParams p;
  std::mt19937 rng(1);
  HistoryState s(g, HistoryStorage::nodes);
  std::vector<double> oracle(g.quadrature(0).size(), 0.);
  for (int k = 0; k < 20; ++k) {
    const StrainCoeffs e = random_coeffs(rng, 1e-3);
    const HistoryState ref = s;
    update_history(s, ref, g, 0, e, p);
    const auto energies = g.node_energies(0, e, p);
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      oracle[i] = std::max(oracle[i], energies[i]);
      EXPECT_EQ(s.node_value(0, i), oracle[i]);
    }
    EXPECT_GE(s.max_value(0), ref.max_value(0));
  }
}

TEST(History, CachedValuesConsistentWithStoredStrain) {
  const Mesh m = hexagonal_mesh(3);
  const HistoryGeometry g(m);
  const MaterialParams p;
  std::mt19937 rng(2);
  HistoryState s(g, HistoryStorage::polynomial);
  for (std::size_t c = 0; c < m.num_cells(); ++c) update_history(s, s, g, static_cast<Index>(c), random_coeffs(rng, 1e-3), p);
  HistoryState r = s;
  recompute_history(r, g, p);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto i = static_cast<Index>(c);
    EXPECT_NEAR(r.max_value(i), s.max_value(i), 1e-12 * std::max(1., s.max_value(i)));
    EXPECT_NEAR(r.integral(g, i), s.integral(g, i), 1e-12 * std::max(1., s.integral(g, i)));
  }
}

TEST(History, NotchSeedProfile) {
  const MaterialParams p;
  const Mesh m = structured_quads(100, 100);
  const HistoryGeometry g(m);
  const HistoryState s = init_history_notch(m, g, Point(0.5, 0.), Point(0.5, 0.5), 1000., p);
  for (std::size_t c = 0; c < m.num_cells(); ++c) {
    const auto i = static_cast<Index>(c);
    const Point x = m.cell(i).centroid;
    const double dist = x.y() <= 0.5 ? std::abs(x.x() - 0.5) : (x - Point(0.5, 0.5)).norm();
    const double expected = 1000. * p.gc / (2. * p.ell) * std::max(0., 1. - 2. * dist / p.ell);
    EXPECT_NEAR(s.max_value(i), expected, 1e-12);
    EXPECT_EQ(s.cell(i).strain, StrainCoeffs::Zero());
    if (dist >= p.ell / 2.) EXPECT_EQ(s.max_value(i), 0.);
  }
  // A centroid on the segment receives the full amplitude, 180 for B = 1000.
  const Mesh on = fixtures::single_cell({Point(0.49, 0.2), Point(0.51, 0.2), Point(0.51, 0.22), Point(0.49, 0.22)});
  const HistoryState so = init_history_notch(on, HistoryGeometry(on), Point(0.5, 0.), Point(0.5, 0.5), 1000., p);
  EXPECT_NEAR(so.max_value(0), 180., 1e-12);
  EXPECT_THROW(init_history_notch(on, HistoryGeometry(on), Point(0.5, 0.), Point(0.5, 0.5), 0., p), ConfigError);
}

TEST(History, SeedIsAdditiveAndIgnoredByComparison) {
  const Mesh m = fixtures::unit_square();
  const HistoryGeometry g(m);
  const MaterialParams p;
  HistoryState s(g, HistoryStorage::polynomial);
  s.cell(0).seed = 50.;
  const HistoryState ref = s;
  // Any positive strain energy beats the zero stored strain energy.
  EXPECT_TRUE(update_history(s, ref, g, 0, constant_strain({1e-4, 0., 0.}), p));
  EXPECT_NEAR(s.max_value(0), 50. + driving_energy({1e-4, 0., 0.}, p), 1e-12);
  EXPECT_NEAR(s.integral(g, 0), 50. + driving_energy({1e-4, 0., 0.}, p), 1e-12);
}
