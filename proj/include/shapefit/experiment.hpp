#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "shapefit/solver.hpp"

namespace shapefit {

enum class ExperimentMode { phase_grid, noise_sweep };

std::string_view to_string(ExperimentMode mode);

/// Batch study over synthetic instances (Gaussian locations, G(n, p),
/// Bernoulli(q) corruption, noise sigma).
///
/// phase-grid: every (n, q) cell of n_values x q_values at the single noise
/// level `sigma`. noise-sweep: the first entries of n_values and q_values at
/// every level of sigma_values, with the same seed per trial across levels.
struct ExperimentConfig {
  ExperimentMode mode = ExperimentMode::phase_grid;
  std::vector<int> n_values;
  std::vector<double> q_values;
  double sigma = 0.0;
  std::vector<double> sigma_values;
  double p = 0.5;
  int d = 3;
  int trials = 10;
  std::uint64_t base_seed = 0;
  SolverConfig solver;
  std::filesystem::path out_dir = ".";

  /// Phase grid: n = 10..80 step 10, q = 0..0.5 step 0.05, sigma = 0.
  /// Noise sweep: n = 50, q = 0.2, sigma in {0, 1e-6, 1e-5, ..., 1}; the
  /// sigma = 0 entry is a noiseless control.
  /// Both use 10 trials, p = 0.5, d = 3 and solver residual tolerances 1e-6.
  static ExperimentConfig defaults(ExperimentMode mode);

  /// Throws InvalidInputError when trials < 1, a q is outside [0, 1], a sigma
  /// is negative, p is outside (0, 1], d < 2, a list is empty or an n < 2.
  void validate() const;
};

/// Overlays the fields present in `j` onto the defaults for `mode` (or the
/// mode named in `j`). Unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j, ExperimentMode mode);
nlohmann::json to_json(const ExperimentConfig& config);
nlohmann::json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const nlohmann::json& j, SolverConfig base = {});

/// mix_seed(base, {n, q_index, trial}); inserting cells never perturbs the
/// seeds of existing ones.
std::uint64_t cell_seed(std::uint64_t base_seed, int n, int q_index, int trial);

struct TrialRecord {
  int n = 0;
  double q = 0.0;
  double sigma = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  /// NaN when the solver refused the instance (disconnected graph).
  double relative_error = 0.0;
  int iterations = 0;
  SolverStatus status = SolverStatus::converged;
};

/// Mean relative error over a group of trials, ignoring refused instances.
struct CellSummary {
  int n = 0;
  double q = 0.0;
  double sigma = 0.0;
  double mean_error = 0.0;  // NaN when every trial was refused
  int trials = 0;
  int refused = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  /// Ordered by (n, q, trial) for the grid and (sigma, trial) for the sweep.
  std::vector<TrialRecord> records;

  /// One entry per (n, q, sigma) group, in record order.
  std::vector<CellSummary> summarize() const;
};

/// Runs every trial on up to `jobs` threads; output order does not depend on
/// scheduling. Per-trial failures are recorded, never thrown.
ExperimentResult run_phase_grid(const ExperimentConfig& config, int jobs = 1);
ExperimentResult run_noise_sweep(const ExperimentConfig& config, int jobs = 1);
ExperimentResult run_experiment(const ExperimentConfig& config, int jobs = 1);

/// Least-squares slope of log(mean error) against log(sigma) over the summary
/// entries with sigma in [lo, hi] and a positive finite mean.
double loglog_slope(const std::vector<CellSummary>& cells, double lo, double hi);

}  // namespace shapefit
