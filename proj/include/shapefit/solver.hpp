#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"

#include "shapefit/core.hpp"

namespace shapefit {

enum class LinearSolveMethod { automatic, direct, conjugate_gradient };

/// ADMM settings. Residual tolerances are absolute on RMS residuals of the
/// problem rescaled so that the constraint reads L(T) = |E|, i.e. the mean
/// edge correlation l_ij is 1; the returned locations satisfy L(T) = 1.
struct SolverConfig {
  double rho = 1.0;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  int max_iters = 50000;
  /// Residual balancing: rho is doubled/halved when one residual exceeds 10x
  /// the other, at most once every 50 iterations.
  bool adapt_rho = true;
  /// automatic: dense factorization when d n <= 3000, conjugate gradient above.
  LinearSolveMethod linear_solve = LinearSolveMethod::automatic;
  double cg_tol = 1e-10;

  void validate() const;
};

enum class SolverStatus { converged, max_iters, infeasible_input };

std::string_view to_string(SolverStatus status);

struct ConstraintViolation {
  double scale = 0.0;      // |L(T) - 1|
  double centering = 0.0;  // |mean(T)|
};

struct SolverResult {
  explicit SolverResult(LocationSet locs) : locations(std::move(locs)) {}

  LocationSet locations;
  double objective = 0.0;  // R at the returned locations
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  ConstraintViolation constraint_violation;
  int iterations = 0;
  SolverStatus status = SolverStatus::infeasible_input;
  std::string message;

  // Diagnostics.
  double split_objective = 0.0;  // sum |z_e| mapped back to L(T) = 1 scale
  double final_rho = 0.0;
  int merit_window_violations = 0;
  bool proximal_regularization = false;
  LinearSolveMethod linear_solve = LinearSolveMethod::direct;
};

/// ShapeFit:  min sum_{ij in E} |P_{v_ij perp}(t_i - t_j)|
///            s.t. sum_{ij in E} <t_i - t_j, v_ij> = 1,  sum_i t_i = 0.
///
/// Edge splitting z_e = P_{v_e perp}(t_i - t_j) with a group soft-threshold
/// z-update and an equality-constrained least-squares t-update (bordered
/// edge-projector Laplacian, factorized once). Deterministic. Disconnected
/// graphs and observation sets with L identically zero return
/// `infeasible_input`; hitting max_iters returns the best feasible iterate.
SolverResult solve_shapefit(const ObservationSet& obs, const SolverConfig& config = {});

/// Projected subgradient reference: steps step0 / sqrt(k) (step0 in the
/// rescaled units described at SolverConfig), each iterate projected back onto
/// {L(T) = 1, mean(T) = 0}. Returns the best-objective iterate. Slow; meant as
/// an independent check of solve_shapefit.
SolverResult reference_subgradient(const ObservationSet& obs, long long iters, double step0);

nlohmann::json to_json(const SolverResult& result);

}  // namespace shapefit
