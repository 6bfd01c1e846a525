#include "shapefit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "shapefit/random.hpp"
#include "shapefit/synth.hpp"

namespace shapefit {

namespace {

using nlohmann::json;

std::string_view linear_solve_name(LinearSolveMethod m) {
  switch (m) {
    case LinearSolveMethod::automatic:
      return "automatic";
    case LinearSolveMethod::direct:
      return "direct";
    case LinearSolveMethod::conjugate_gradient:
      return "conjugate-gradient";
  }
  return "automatic";
}

LinearSolveMethod parse_linear_solve(const std::string& s) {
  if (s == "automatic") return LinearSolveMethod::automatic;
  if (s == "direct") return LinearSolveMethod::direct;
  if (s == "conjugate-gradient") return LinearSolveMethod::conjugate_gradient;
  throw InvalidInputError("unknown linear_solve '" + s + "'");
}

ExperimentMode parse_mode(const std::string& s) {
  if (s == "phase-grid") return ExperimentMode::phase_grid;
  if (s == "noise-sweep") return ExperimentMode::noise_sweep;
  throw InvalidInputError("unknown mode '" + s + "'");
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("config field '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw InvalidInputError("unknown " + std::string(where) + " field '" + key + "'");
    }
  }
}

struct Task {
  int n;
  int q_index;
  double q;
  double sigma;
  int trial;
};

TrialRecord run_trial(const ExperimentConfig& config, const Task& task) {
  TrialRecord rec;
  rec.n = task.n;
  rec.q = task.q;
  rec.sigma = task.sigma;
  rec.trial = task.trial;
  rec.seed = cell_seed(config.base_seed, task.n, task.q_index, task.trial);
  const Instance instance = generate_instance({task.n, config.d, config.p, task.q, task.sigma, rec.seed});
  const SolverResult result = solve_shapefit(instance.observations, config.solver);
  rec.iterations = result.iterations;
  rec.status = result.status;
  rec.relative_error = result.status == SolverStatus::infeasible_input
                           ? std::numeric_limits<double>::quiet_NaN()
                           : relative_error(result.locations, *instance.locations);
  return rec;
}

std::vector<TrialRecord> run_tasks(const ExperimentConfig& config, const std::vector<Task>& tasks, int jobs) {
  std::vector<TrialRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) records[k] = run_trial(config, tasks[k]);
  };
  const int threads = std::clamp<int>(jobs, 1, static_cast<int>(std::max<std::size_t>(tasks.size(), 1)));
  if (threads == 1) {
    worker();
    return records;
  }
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return records;
}

}  // namespace

std::string_view to_string(ExperimentMode mode) {
  return mode == ExperimentMode::phase_grid ? "phase-grid" : "noise-sweep";
}

ExperimentConfig ExperimentConfig::defaults(ExperimentMode mode) {
  ExperimentConfig c;
  c.mode = mode;
  c.solver.tol_primal = 1e-6;
  c.solver.tol_dual = 1e-6;
  if (mode == ExperimentMode::phase_grid) {
    for (int n = 10; n <= 80; n += 10) c.n_values.push_back(n);
    for (int k = 0; k <= 10; ++k) c.q_values.push_back(0.05 * k);
  } else {
    c.n_values = {50};
    c.q_values = {0.2};
    c.sigma_values = {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (trials < 1) throw InvalidInputError("trials must be at least 1");
  if (n_values.empty()) throw InvalidInputError("n_values must not be empty");
  if (q_values.empty()) throw InvalidInputError("q_values must not be empty");
  for (int n : n_values) {
    if (n < 2) throw InvalidInputError("every n must be at least 2");
  }
  for (double q : q_values) {
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidInputError("every q must lie in [0, 1]");
  }
  if (!(sigma >= 0.0)) throw InvalidInputError("sigma must be non-negative");
  if (mode == ExperimentMode::noise_sweep && sigma_values.empty()) {
    throw InvalidInputError("sigma_values must not be empty");
  }
  for (double s : sigma_values) {
    if (!(s >= 0.0)) throw InvalidInputError("every sigma must be non-negative");
  }
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInputError("p must lie in (0, 1]");
  if (d < 2) throw InvalidInputError("d must be at least 2");
  solver.validate();
}

json to_json(const SolverConfig& c) {
  return {{"rho", c.rho},
          {"tol_primal", c.tol_primal},
          {"tol_dual", c.tol_dual},
          {"max_iters", c.max_iters},
          {"adapt_rho", c.adapt_rho},
          {"linear_solve", std::string(linear_solve_name(c.linear_solve))},
          {"cg_tol", c.cg_tol}};
}

SolverConfig solver_config_from_json(const json& j, SolverConfig base) {
  if (!j.is_object()) throw InvalidInputError("solver config must be an object");
  reject_unknown(j, {"rho", "tol_primal", "tol_dual", "max_iters", "adapt_rho", "linear_solve", "cg_tol", "seed"},
                 "solver");
  if (j.contains("rho")) base.rho = get_as<double>(j, "rho");
  if (j.contains("tol_primal")) base.tol_primal = get_as<double>(j, "tol_primal");
  if (j.contains("tol_dual")) base.tol_dual = get_as<double>(j, "tol_dual");
  if (j.contains("max_iters")) base.max_iters = get_as<int>(j, "max_iters");
  if (j.contains("adapt_rho")) base.adapt_rho = get_as<bool>(j, "adapt_rho");
  if (j.contains("linear_solve")) base.linear_solve = parse_linear_solve(get_as<std::string>(j, "linear_solve"));
  if (j.contains("cg_tol")) base.cg_tol = get_as<double>(j, "cg_tol");
  base.validate();
  return base;
}

json to_json(const ExperimentConfig& c) {
  return {{"mode", std::string(to_string(c.mode))},
          {"n_values", c.n_values},
          {"q_values", c.q_values},
          {"sigma", c.sigma},
          {"sigma_values", c.sigma_values},
          {"p", c.p},
          {"d", c.d},
          {"trials", c.trials},
          {"base_seed", c.base_seed},
          {"solver", to_json(c.solver)},
          {"out_dir", c.out_dir.generic_string()}};
}

ExperimentConfig experiment_config_from_json(const json& j, ExperimentMode mode) {
  if (!j.is_object()) throw InvalidInputError("experiment config must be a JSON object");
  reject_unknown(j, {"mode", "n_values", "q_values", "sigma", "sigma_values", "p", "d", "trials", "base_seed",
                     "solver", "out_dir"},
                 "experiment");
  if (j.contains("mode")) mode = parse_mode(get_as<std::string>(j, "mode"));
  ExperimentConfig c = ExperimentConfig::defaults(mode);
  if (j.contains("n_values")) c.n_values = get_as<std::vector<int>>(j, "n_values");
  if (j.contains("q_values")) c.q_values = get_as<std::vector<double>>(j, "q_values");
  if (j.contains("sigma")) c.sigma = get_as<double>(j, "sigma");
  if (j.contains("sigma_values")) c.sigma_values = get_as<std::vector<double>>(j, "sigma_values");
  if (j.contains("p")) c.p = get_as<double>(j, "p");
  if (j.contains("d")) c.d = get_as<int>(j, "d");
  if (j.contains("trials")) c.trials = get_as<int>(j, "trials");
  if (j.contains("base_seed")) c.base_seed = get_as<std::uint64_t>(j, "base_seed");
  if (j.contains("solver")) c.solver = solver_config_from_json(j.at("solver"), c.solver);
  if (j.contains("out_dir")) c.out_dir = get_as<std::string>(j, "out_dir");
  c.validate();
  return c;
}

std::uint64_t cell_seed(std::uint64_t base_seed, int n, int q_index, int trial) {
  return mix_seed(base_seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(q_index),
                              static_cast<std::uint64_t>(trial)});
}

std::vector<CellSummary> ExperimentResult::summarize() const {
  std::vector<CellSummary> cells;
  double sum = 0.0;
  for (const TrialRecord& r : records) {
    if (cells.empty() || cells.back().n != r.n || cells.back().q != r.q || cells.back().sigma != r.sigma) {
      cells.push_back({r.n, r.q, r.sigma, 0.0, 0, 0});
      sum = 0.0;
    }
    CellSummary& c = cells.back();
    ++c.trials;
    if (std::isnan(r.relative_error)) {
      ++c.refused;
    } else {
      sum += r.relative_error;
    }
    const int solved = c.trials - c.refused;
    c.mean_error = solved > 0 ? sum / solved : std::numeric_limits<double>::quiet_NaN();
  }
  return cells;
}

ExperimentResult run_phase_grid(const ExperimentConfig& config, int jobs) {
  if (config.mode != ExperimentMode::phase_grid) throw InvalidInputError("run_phase_grid needs mode phase-grid");
  config.validate();
  std::vector<Task> tasks;
  for (int n : config.n_values) {
    for (std::size_t qi = 0; qi < config.q_values.size(); ++qi) {
      for (int t = 0; t < config.trials; ++t) {
        tasks.push_back({n, static_cast<int>(qi), config.q_values[qi], config.sigma, t});
      }
    }
  }
  return {config, run_tasks(config, tasks, jobs)};
}

ExperimentResult run_noise_sweep(const ExperimentConfig& config, int jobs) {
  if (config.mode != ExperimentMode::noise_sweep) throw InvalidInputError("run_noise_sweep needs mode noise-sweep");
  config.validate();
  std::vector<Task> tasks;
  // The seed ignores sigma, so every noise level sees the same graph,
  // corruption pattern and noise directions.
  for (double sigma : config.sigma_values) {
    for (int t = 0; t < config.trials; ++t) {
      tasks.push_back({config.n_values.front(), 0, config.q_values.front(), sigma, t});
    }
  }
  return {config, run_tasks(config, tasks, jobs)};
}

ExperimentResult run_experiment(const ExperimentConfig& config, int jobs) {
  return config.mode == ExperimentMode::phase_grid ? run_phase_grid(config, jobs) : run_noise_sweep(config, jobs);
}

double loglog_slope(const std::vector<CellSummary>& cells, double lo, double hi) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const CellSummary& c : cells) {
    if (c.sigma < lo || c.sigma > hi || !(c.sigma > 0.0) || !(c.mean_error > 0.0) || !std::isfinite(c.mean_error)) {
      continue;
    }
    const double x = std::log(c.sigma);
    const double y = std::log(c.mean_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) throw InvalidInputError("slope needs at least two usable noise levels");
  const double denom = count * sxx - sx * sx;
  if (!(denom > 0.0)) throw InvalidInputError("slope needs two distinct noise levels");
  return (count * sxy - sx * sy) / denom;
}

}  // namespace shapefit
