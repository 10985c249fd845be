#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace hhofrac;

namespace {

const std::vector<int> all_sides = {marker::bottom, marker::right, marker::top, marker::left};

DirichletCondition affine_condition(std::vector<int> markers, const Eigen::Matrix2d& grad, const Vector2& shift) {
  return {"affine", std::move(markers),
          [grad, shift](double load, const Point& x) -> Vector2 { return load * (grad * x + shift); }};
}

std::vector<double> random_weights(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(0.05, 1.);
  std::vector<double> g(n);
  for (auto& v : g) v = d(rng);
  return g;
}

} // namespace

TEST(Solver, ConvergenceCheck) {
  const Vector u = Vector::Constant(4, 1.), phi = Vector::Constant(3, 0.5);
  EXPECT_TRUE(convergence_check(u, u, phi, phi, 1e-5));
  EXPECT_TRUE(convergence_check(Vector::Zero(4), Vector::Zero(4), Vector::Zero(3), Vector::Zero(3), 1e-12));
  Vector u2 = u;
  u2[0] += 1e-3 * u.norm();
  EXPECT_FALSE(convergence_check(u2, u, phi, phi, 1e-5));
  // Relative increment exactly at the tolerance passes.
  Vector a = Vector::Zero(2), b = Vector::Zero(2);
  a[0] = 1.;
  b[0] = 0.75;
  EXPECT_TRUE(convergence_check(a, b, phi, phi, 0.25));
  EXPECT_FALSE(convergence_check(a, b, phi, phi, 0.2499999));
  EXPECT_FALSE(convergence_check(u, u, a, b, 0.2));
}

TEST(Solver, AffinePatchTest) {
  Eigen::Matrix2d grad;
  grad << 0.3, -0.2, 0.1, 0.4;
  const Vector2 shift(0.05, -0.1);
  for (Mesh& mesh : std::vector<Mesh>{structured_triangles(4, 4), hexagonal_mesh(4),
                                      quadtree_mesh(2, 2, [](const Box& b, int) { return b.x0 < 0.2; })}) {
    FractureProblem p(std::move(mesh), MaterialParams{}, SolverConfig{}, {affine_condition(all_sides, grad, shift)});
    const double load = 2.;
    const Vector u = p.solve_mechanical(Vector::Zero(p.dofs().phase_size()), load);
    for (Index c = 0; c < static_cast<Index>(p.mesh().num_cells()); ++c) {
      const Vector want =
          interpolate_displacement(p.mesh(), c, [&](const Point& x) -> Vector2 { return load * (grad * x + shift); });
      EXPECT_LT((p.local_displacement(c, u) - want).norm(), 1e-10);
    }
  }
}

TEST(Solver, UniformDegradationCancels) {
  FractureProblem p(structured_triangles(5, 5), MaterialParams{}, SolverConfig{},
                    {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                     translation_condition("right", {marker::right}, Vector2(0., 0.))});
  const Vector u0 = p.solve_mechanical(Vector::Zero(p.dofs().phase_size()), 1e-3);
  const Vector u1 = p.solve_mechanical(Vector::Ones(p.dofs().phase_size()), 1e-3);
  EXPECT_LT((u1 - u0).norm(), 1e-9 * u0.norm());
}

TEST(Solver, SingleCellMatchesDenseSolve) {
  for (const auto& poly : {fixtures::regular_polygon(6), fixtures::nonconvex_polygon()}) {
    std::vector<Index> ids;
    std::vector<BoundaryEdge> bnd;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      ids.push_back(static_cast<Index>(i));
      bnd.push_back({static_cast<Index>(i), static_cast<Index>((i + 1) % poly.size()), i == 0 ? marker::left : marker::top});
    }
    FractureProblem p(Mesh(poly, {ids}, bnd), MaterialParams{}, SolverConfig{},
                      {translation_condition("fixed", {marker::left}, Vector2(0.3, -0.7))});
    const std::vector<double> g = {0.37};
    const Vector d = p.dirichlet_values(1.);
    const Vector u = p.solve_mechanical_with(g, d);
    const Vector want = oracles::dense_solve(p, g, d);
    EXPECT_LT((u - want).norm(), 1e-12 * want.norm());
  }
}

// Condensed global solve against a dense solve of the full cell+face system
// with nonuniform degradation.
TEST(Solver, CondensedMechanicalMatchesMonolithic) {
  for (Mesh& mesh : std::vector<Mesh>{structured_triangles(2, 2), structured_quads(4, 4), hexagonal_mesh(2)}) {
    ASSERT_LE(mesh.num_cells(), 16u);
    FractureProblem p(std::move(mesh), MaterialParams{}, SolverConfig{},
                      {translation_condition("left", {marker::left}, Vector2(-1., 0.2)),
                       translation_condition("right", {marker::right}, Vector2(0., 0.))});
    const auto g = random_weights(p.mesh().num_cells(), 3);
    const Vector d = p.dirichlet_values(1e-2);
    const Vector u = p.solve_mechanical_with(g, d);
    const Vector want = oracles::dense_solve(p, g, d);
    EXPECT_LT((u - want).norm(), 1e-10 * want.norm());
  }
}

TEST(Solver, ReactionMatchesUniaxialStretch) {
  // u = (e x, 0) on the whole boundary: sigma_xx = (2 mu + lambda) e. The
  // residual on the right edge is +sigma_xx * length along e1 and the left
  // edge carries the opposite resultant.
  const MaterialParams mat;
  const double e = 1e-3;
  Eigen::Matrix2d grad;
  grad << e, 0., 0., 0.;
  FractureProblem p(structured_triangles(6, 6), mat, SolverConfig{}, {affine_condition(all_sides, grad, Vector2::Zero())});
  StateFields s = p.initial_state();
  s.displacement = p.solve_mechanical(s.phase, 1.);
  const Vector2 right = p.reaction_force(s, {marker::right});
  const Vector2 left = p.reaction_force(s, {marker::left});
  EXPECT_NEAR(right.x(), (2. * mat.mu + mat.lambda) * e, 1e-10);
  EXPECT_NEAR(right.y(), 0., 1e-10);
  EXPECT_NEAR(left.x(), -right.x(), 1e-10);

  // Dense oracle: the constant-mode rows of the assembled residual.
  const Vector r = oracles::dense_elastic(p, std::vector<double>(p.mesh().num_cells(), 1.)) * s.displacement;
  Vector2 oracle = Vector2::Zero();
  for (Index f = 0; f < static_cast<Index>(p.mesh().num_faces()); ++f)
    if (p.mesh().face(f).is_boundary() && p.mesh().face(f).marker == marker::right)
      oracle += Vector2(r[p.dofs().face_offset(f)], r[p.dofs().face_offset(f) + 2]);
  EXPECT_LT((oracle - right).norm(), 1e-12);

  s.displacement.setZero();
  EXPECT_EQ(p.reaction_force(s, {marker::right}).norm(), 0.);
  EXPECT_THROW(p.reaction_force(s, {marker::notch}), ConfigError);
}

TEST(Solver, ActionReactionInTractionTest) {
  FractureProblem p(hexagonal_mesh(6), MaterialParams{}, SolverConfig{},
                    {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                     translation_condition("right", {marker::right}, Vector2(0., 0.))});
  StateFields s = p.initial_state();
  s.displacement = p.solve_mechanical(s.phase, 1e-3);
  const Vector2 left = p.reaction_force(s, {marker::left});
  const Vector2 right = p.reaction_force(s, {marker::right});
  EXPECT_GT(left.norm(), 0.);
  EXPECT_LT((left + right).norm(), 1e-8 * left.norm());
}

TEST(Solver, ZeroIncrementIsFixedPoint) {
  SolverConfig cfg;
  FractureProblem p(structured_triangles(6, 6), MaterialParams{}, cfg,
                    {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                     translation_condition("right", {marker::right}, Vector2(0., 0.))});
  StateFields s = p.initial_state();
  ASSERT_TRUE(p.staggered_step(s, 1e-3).converged);
  const Vector u = s.displacement, phi = s.phase;
  const StepReport r = p.staggered_step(s, 1e-3);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 1);
  EXPECT_LE((s.displacement - u).norm(), cfg.tolerance * u.norm());
  EXPECT_LE((s.phase - phi).norm(), cfg.tolerance * phi.norm());
}

TEST(Solver, FirstModeOneStepIsUndamaged) {
  RunConfig cfg = parse_config("[loading]\npreset = mode-I\nsteps = 1\n[notch]\nmode = mesh-cut\n");
  BenchmarkRun run(cfg);
  RunOptions opt;
  opt.write_files = false;
  StepReport last;
  opt.on_step = [&](const StateFields&, const LoadRow&, const StepReport& r) { last = r; };
  run.run(opt);
  EXPECT_TRUE(last.converged);
  EXPECT_LT(last.phase_max, 0.1);
  EXPECT_DOUBLE_EQ(run.state().load, 1e-5);
}

// With H frozen the phase field decouples, so the staggered fixed point is
// phi* = Phi(H) followed by u* = U(g(phi*)); both are recomputed densely.
TEST(Solver, FrozenHistoryFixedPoint) {
  MaterialParams mat;
  SolverConfig cfg;
  cfg.freeze_history = true;
  FractureProblem p(structured_quads(2, 2), mat, cfg,
                    {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                     translation_condition("right", {marker::right}, Vector2(0., 0.))});
  ASSERT_EQ(p.mesh().num_cells(), 4u);
  StateFields s = p.initial_state();
  const double seeds[4] = {10., 50., 0., 200.};
  for (Index c = 0; c < 4; ++c) s.history.cell(c).seed = seeds[c];

  // Dense phase oracle.
  const Index nc = 4, n = p.dofs().phase_size();
  Matrix a = Matrix::Zero(n, n);
  Vector rhs = Vector::Zero(n);
  for (Index c = 0; c < nc; ++c) {
    const double hint = s.history.integral(p.history_geometry(), c);
    const Matrix b = local_phase_matrix(p.phase_operators(c), hint, mat);
    std::vector<Index> map = {c};
    for (Index f : p.mesh().cell(c).faces) map.push_back(nc + f);
    for (std::size_t i = 0; i < map.size(); ++i)
      for (std::size_t j = 0; j < map.size(); ++j) a(map[i], map[j]) += b(static_cast<Index>(i), static_cast<Index>(j));
    rhs[c] = 2. / (mat.ell * mat.gc) * hint;
  }
  const Vector phi_star = a.ldlt().solve(rhs);
  std::vector<double> g(4);
  for (Index c = 0; c < 4; ++c) g[static_cast<std::size_t>(c)] = degradation(phi_star[c], mat);
  const Vector u_star = oracles::dense_solve(p, g, p.dirichlet_values(2e-3));

  const StepReport r = p.staggered_step(s, 2e-3);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.iterations, 3);
  EXPECT_LT((s.phase - phi_star).norm(), 1e-10 * phi_star.norm());
  EXPECT_LT((s.displacement - u_star).norm(), 1e-10 * u_star.norm());
}

TEST(Solver, ExitStateSatisfiesPhaseEquation) {
  FractureProblem p(structured_triangles(8, 8), MaterialParams{}, SolverConfig{},
                    {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                     translation_condition("right", {marker::right}, Vector2(0., 0.))});
  StateFields s = p.initial_state();
  for (int k = 1; k <= 3; ++k) {
    const Vector prev = s.phase;
    p.staggered_step(s, 2e-3 * k);
    const Vector again = p.solve_phase(s.history, prev);
    EXPECT_LT((again - s.phase).norm(), 1e-10 * std::max(1., s.phase.norm()));
  }
}

TEST(Solver, NonConvergenceRaisesUnlessAccepted) {
  SolverConfig cfg;
  cfg.max_iterations = 1;
  cfg.tolerance = 1e-14;
  auto make = [&] {
    return FractureProblem(structured_triangles(4, 4), MaterialParams{}, cfg,
                           {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                            translation_condition("right", {marker::right}, Vector2(0., 0.))});
  };
  FractureProblem strict = make();
  StateFields s = strict.initial_state();
  EXPECT_THROW(strict.staggered_step(s, 1e-3), SolverError);
  EXPECT_EQ(s.step, 0);
  cfg.accept_on_max = true;
  FractureProblem lenient = make();
  StateFields t = lenient.initial_state();
  const StepReport r = lenient.staggered_step(t, 1e-3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(t.step, 1);
}

TEST(Solver, ConfigValidation) {
  SolverConfig cfg;
  cfg.tolerance = 0.;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = SolverConfig{};
  cfg.max_iterations = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  EXPECT_THROW(FractureProblem(structured_triangles(2, 2), MaterialParams{}, SolverConfig{},
                               {translation_condition("a", {marker::left}, Vector2(1., 0.)),
                                translation_condition("b", {marker::left}, Vector2(0., 0.))}),
               ConfigError);
}

TEST(Solver, IterativeLinearSolverAgreesWithDirect) {
  SolverConfig cg;
  cg.linear_solver = LinearSolverKind::cg;
  const std::vector<DirichletCondition> bc = {translation_condition("left", {marker::left}, Vector2(-1., 0.)),
                                              translation_condition("right", {marker::right}, Vector2(0., 0.))};
  FractureProblem a(structured_triangles(6, 6), MaterialParams{}, SolverConfig{}, bc);
  FractureProblem b(structured_triangles(6, 6), MaterialParams{}, cg, bc);
  const auto g = random_weights(a.mesh().num_cells(), 9);
  const Vector ua = a.solve_mechanical_with(g, a.dirichlet_values(1e-3));
  const Vector ub = b.solve_mechanical_with(g, b.dirichlet_values(1e-3));
  EXPECT_LT((ua - ub).norm(), 1e-7 * ua.norm());
}
