#include <gtest/gtest.h>

#include <cmath>

#include "shapefit/io.hpp"
#include "shapefit/solver.hpp"
#include "shapefit/synth.hpp"
#include "test_util.hpp"

namespace shapefit {
namespace {

using testing::vec;

ObservationSet single_edge() {
  Matrix v(2, 1);
  v << 1.0, 0.0;
  return ObservationSet(2, {{0, 1}}, v);
}

void expect_feasible(const SolverResult& r, const ObservationSet& obs, double tol = 1e-9) {
  EXPECT_LE(std::abs(constraint_L(r.locations, obs).total - 1.0), tol);
  EXPECT_LE(r.locations.mean().norm(), tol);
  EXPECT_LE(r.constraint_violation.scale, tol);
  EXPECT_LE(r.constraint_violation.centering, tol);
}

TEST(Solver, SingleEdgeAnalytic) {
  const ObservationSet obs = single_edge();
  const SolverResult r = solve_shapefit(obs);
  ASSERT_EQ(r.status, SolverStatus::converged) << r.message;
  EXPECT_LE((r.locations.point(0) - vec({0.5, 0.0})).norm(), 1e-9);
  EXPECT_LE((r.locations.point(1) - vec({-0.5, 0.0})).norm(), 1e-9);
  EXPECT_LE(r.objective, 1e-9);
  expect_feasible(r, obs);
}

TEST(Solver, ExactTriangle) {
  Matrix pts(2, 3);
  pts << 0.3, -1.2, 0.9, 0.1, 0.4, -0.8;
  const LocationSet T0(pts);
  const ObservationSet obs = exact_observations(T0, Graph(3, testing::complete_edges(3)));
  const SolverResult r = solve_shapefit(obs);
  ASSERT_EQ(r.status, SolverStatus::converged);
  EXPECT_LE(relative_error(r.locations, T0), 1e-6);
  EXPECT_LE(r.objective, 1e-8);
}

TEST(Solver, ExactRecoveryWithoutCorruption) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = generate_instance({20, 3, 0.5, 0.0, 0.0, seed});
    const SolverResult r = solve_shapefit(inst.observations);
    ASSERT_EQ(r.status, SolverStatus::converged) << seed;
    EXPECT_LE(relative_error(r.locations, *inst.locations), 1e-5) << seed;
    expect_feasible(r, inst.observations);
  }
}

TEST(Solver, RecoversUnderModerateCorruption) {
  const Instance inst = generate_instance({30, 3, 0.8, 0.1, 0.0, 4});
  const SolverResult r = solve_shapefit(inst.observations);
  ASSERT_EQ(r.status, SolverStatus::converged);
  EXPECT_LE(relative_error(r.locations, *inst.locations), 1e-4);
}

TEST(Solver, ConvergedResultCarriesCertificate) {
  for (std::uint64_t seed = 10; seed < 14; ++seed) {
    const Instance inst = generate_instance({25, 3, 0.5, 0.3, 0.02, seed});
    const ObservationSet& obs = inst.observations;
    SolverConfig cfg;
    cfg.tol_primal = cfg.tol_dual = 1e-7;
    const SolverResult r = solve_shapefit(obs, cfg);
    if (r.status == SolverStatus::infeasible_input) continue;
    ASSERT_EQ(r.status, SolverStatus::converged) << r.message;
    EXPECT_LE(r.primal_residual, cfg.tol_primal);
    EXPECT_LE(r.dual_residual, cfg.tol_dual);
    expect_feasible(r, obs);
    EXPECT_NEAR(r.objective, objective_R(r.locations, obs), 1e-12 * (1.0 + r.objective));
    EXPECT_LE(std::abs(r.objective - r.split_objective), cfg.tol_primal * std::sqrt(obs.edge_count()));
  }
}

TEST(Solver, DisconnectedAndDegenerateInputsAreRefused) {
  Matrix v(3, 2);
  v << 1, 0, 0, 1, 0, 0;
  const ObservationSet split(4, {{0, 1}, {2, 3}}, v);
  EXPECT_EQ(solve_shapefit(split).status, SolverStatus::infeasible_input);
  EXPECT_EQ(reference_subgradient(split, 10, 0.01).status, SolverStatus::infeasible_input);

  EXPECT_EQ(solve_shapefit(ObservationSet(1, {}, Matrix(3, 0))).status, SolverStatus::infeasible_input);

  // Every vertex sees its observations cancel, so L vanishes identically.
  Matrix w(2, 3);
  w << 1, -1, 1, 0, 0, 0;
  const ObservationSet dead(3, {{0, 1}, {0, 2}, {1, 2}}, w);
  const SolverResult r = solve_shapefit(dead);
  EXPECT_EQ(r.status, SolverStatus::infeasible_input);
  EXPECT_FALSE(r.message.empty());
  EXPECT_EQ(to_string(r.status), "infeasible-input");
}

TEST(Solver, MaxItersReturnsBestFeasibleIterate) {
  const Instance inst = generate_instance({30, 3, 0.5, 0.3, 0.0, 2});
  SolverConfig cfg;
  cfg.max_iters = 5;
  const SolverResult r = solve_shapefit(inst.observations, cfg);
  EXPECT_EQ(r.status, SolverStatus::max_iters);
  EXPECT_EQ(to_string(r.status), "max-iters");
  EXPECT_LE(r.iterations, 5);
  expect_feasible(r, inst.observations);
}

TEST(Solver, Deterministic) {
  const Instance inst = generate_instance({20, 3, 0.5, 0.2, 0.01, 8});
  const SolverResult a = solve_shapefit(inst.observations);
  const SolverResult b = solve_shapefit(inst.observations);
  EXPECT_EQ(a.locations.matrix(), b.locations.matrix());
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Solver, PermutingLabelsPermutesSolution) {
  const Instance inst = generate_instance({20, 3, 0.6, 0.1, 0.0, 12});
  const ObservationSet& obs = inst.observations;
  const int n = obs.size();
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[i] = (7 * i + 3) % n;
  std::vector<EdgePair> edges;
  Matrix dirs(obs.dim(), obs.edge_count());
  for (int k = 0; k < obs.edge_count(); ++k) {
    const int a = perm[obs.edge(k).i];
    const int b = perm[obs.edge(k).j];
    edges.push_back({std::min(a, b), std::max(a, b)});
    dirs.col(k) = a < b ? Vector(obs.direction(k)) : Vector(-obs.direction(k));
  }
  const SolverResult r0 = solve_shapefit(obs);
  const SolverResult r1 = solve_shapefit(ObservationSet(n, edges, dirs));
  ASSERT_EQ(r0.status, SolverStatus::converged);
  ASSERT_EQ(r1.status, SolverStatus::converged);
  for (int i = 0; i < n; ++i) {
    EXPECT_LE((r0.locations.point(i) - r1.locations.point(perm[i])).norm(), 1e-6);
  }
}

TEST(Solver, ConjugateGradientAgreesWithDirect) {
  const Instance inst = generate_instance({40, 3, 0.4, 0.2, 0.01, 5});
  SolverConfig direct;
  direct.linear_solve = LinearSolveMethod::direct;
  SolverConfig cg;
  cg.linear_solve = LinearSolveMethod::conjugate_gradient;
  const SolverResult a = solve_shapefit(inst.observations, direct);
  const SolverResult b = solve_shapefit(inst.observations, cg);
  ASSERT_EQ(a.status, SolverStatus::converged);
  ASSERT_EQ(b.status, SolverStatus::converged);
  EXPECT_EQ(b.linear_solve, LinearSolveMethod::conjugate_gradient);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::max(1.0, a.objective));
  EXPECT_LE((a.locations.matrix() - b.locations.matrix()).norm(), 1e-5 * a.locations.matrix().norm());
}

TEST(Solver, ConfigValidation) {
  SolverConfig cfg;
  cfg.rho = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInputError);
  cfg = {};
  cfg.tol_dual = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidInputError);
  cfg = {};
  cfg.max_iters = -1;
  EXPECT_THROW(cfg.validate(), InvalidInputError);
  EXPECT_NO_THROW(SolverConfig{}.validate());
}

TEST(Solver, JsonFields) {
  const auto j = to_json(solve_shapefit(single_edge()));
  for (const char* key : {"status", "objective", "iterations", "primal_residual", "dual_residual",
                          "constraint_violation", "locations"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["status"], "converged");
  EXPECT_EQ(j["locations"].size(), 2u);
}

TEST(Subgradient, ZeroIterationsIsFeasibleProjection) {
  const Instance inst = generate_instance({12, 3, 0.6, 0.2, 0.0, 3});
  const SolverResult r = reference_subgradient(inst.observations, 0, 0.01);
  expect_feasible(r, inst.observations, 1e-12);
  EXPECT_EQ(r.iterations, 0);
}

TEST(Subgradient, SingleEdgeDrivesObjectiveToZero) {
  const SolverResult r = reference_subgradient(single_edge(), 100000, 0.01);
  EXPECT_LE(r.objective, 1e-3);
  expect_feasible(r, single_edge(), 1e-12);
}

TEST(Subgradient, AgreesWithSplittingSolver) {
  std::uint64_t seed = 21;
  Instance inst = generate_instance({8, 3, 0.6, 0.3, 0.05, seed});
  while (testing::has_bridge(graph_of(inst.observations))) inst = generate_instance({8, 3, 0.6, 0.3, 0.05, ++seed});
  const SolverResult admm = solve_shapefit(inst.observations);
  ASSERT_EQ(admm.status, SolverStatus::converged);
  const SolverResult sub = reference_subgradient(inst.observations, 1000000, 0.1);
  EXPECT_LE(std::abs(admm.objective - sub.objective) / std::max(sub.objective, 1e-6), 1e-3);
  // The splitting solver should never lose to the slow reference.
  EXPECT_LE(admm.objective, sub.objective + 1e-9);
}

TEST(Solver, BridgeAllowsCollapsedZeroObjective) {
  // Seed 21 draws a vertex of degree one: everything else collapses to a point.
  const Instance inst = generate_instance({8, 3, 0.6, 0.3, 0.05, 21});
  ASSERT_TRUE(testing::has_bridge(graph_of(inst.observations)));
  const SolverResult r = solve_shapefit(inst.observations);
  ASSERT_EQ(r.status, SolverStatus::converged);
  EXPECT_LE(r.objective, 1e-9);
  expect_feasible(r, inst.observations);
}

}  // namespace
}  // namespace shapefit
