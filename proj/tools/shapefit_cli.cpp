#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "shapefit/conditions.hpp"
#include "shapefit/experiment.hpp"
#include "shapefit/graph.hpp"
#include "shapefit/io.hpp"
#include "shapefit/random.hpp"
#include "shapefit/report.hpp"
#include "shapefit/solver.hpp"
#include "shapefit/synth.hpp"

namespace {

using namespace shapefit;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitIo = 4;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  std::string config;
};

struct GenerateOptions {
  int n = 20;
  int d = 3;
  double p = 0.5;
  double q = 0.0;
  double sigma = 0.0;
  std::optional<double> gamma;
  std::string strategy = "random";
};

struct SolveOptions {
  std::string instance;
  double rho = 1.0;
  double tol = 1e-8;
  int max_iters = 50000;
  bool no_adapt = false;
  std::string linear_solve = "automatic";
};

struct CheckOptions {
  std::string instance;
  std::string theorem = "highd";
  std::optional<double> p;
  std::optional<double> beta;
  int grid = 512;
  std::string format = "text";
};

struct ExperimentOverrides {
  std::vector<int> n_values;
  std::vector<double> q_values;
  std::optional<double> sigma;
  std::vector<double> sigma_values;
  std::optional<double> p;
  std::optional<int> d;
  std::optional<int> trials;
};

// Output goes to --out when given, otherwise stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot open " + out + " for writing");
  f << text;
  if (!f) throw IoError("failed writing " + out);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInputError(path + " is not valid JSON: " + e.what());
  }
}

std::ostream& summary_stream(const std::string& out) { return out.empty() || out == "-" ? std::cerr : std::cout; }

std::string with_extension(const std::string& path, const std::string& ext) {
  std::filesystem::path p(path);
  p.replace_extension(ext);
  return p.string();
}

int cmd_generate(const GlobalOptions& g, const GenerateOptions& o) {
  const std::uint64_t seed = g.seed.value_or(0);
  Instance instance = generate_instance({o.n, o.d, o.p, o.gamma ? 0.0 : o.q, o.sigma, seed});
  if (o.gamma) {
    AdversaryConfig adv;
    adv.gamma = *o.gamma;
    adv.seed = mix_seed(seed, {4});
    if (o.strategy == "random") {
      adv.strategy = AdversaryStrategy::random;
    } else if (o.strategy == "self-consistent") {
      adv.strategy = AdversaryStrategy::self_consistent;
    } else {
      throw InvalidInputError("unknown adversary strategy '" + o.strategy + "'");
    }
    for (const std::string& w : adv.validate()) std::cerr << "warning: " << w << '\n';
    const Graph graph = graph_of(instance.observations);
    instance.observations = adversarial_bad_set(*instance.locations, graph, adv);
    instance.metadata.erase("q");
    instance.metadata["gamma"] = format_real(adv.gamma);
    instance.metadata["adversary"] = o.strategy;
  }
  emit(g.out, to_text(instance));
  summary_stream(g.out) << "n=" << instance.observations.size() << " d=" << instance.observations.dim()
                        << " edges=" << instance.observations.edge_count()
                        << " bad=" << instance.observations.bad_count() << '\n';
  return kExitOk;
}

LinearSolveMethod parse_method(const std::string& s) {
  if (s == "automatic") return LinearSolveMethod::automatic;
  if (s == "direct") return LinearSolveMethod::direct;
  return LinearSolveMethod::conjugate_gradient;
}

int cmd_solve(const GlobalOptions& g, const SolveOptions& o) {
  const Instance instance = load_instance(o.instance);
  SolverConfig cfg;
  cfg.rho = o.rho;
  cfg.tol_primal = o.tol;
  cfg.tol_dual = o.tol;
  cfg.max_iters = o.max_iters;
  cfg.adapt_rho = !o.no_adapt;
  cfg.linear_solve = parse_method(o.linear_solve);
  if (!g.config.empty()) cfg = solver_config_from_json(read_json_file(g.config), cfg);
  const SolverResult result = solve_shapefit(instance.observations, cfg);
  if (result.status == SolverStatus::infeasible_input) {
    std::cerr << "infeasible input: " << result.message << '\n';
    return kExitInfeasible;
  }

  json doc = to_json(result);
  doc["config"] = to_json(cfg);
  doc["instance"] = o.instance;
  std::ostringstream block;
  write_locations(block, result.locations);
  doc["shapefit_v1"] = block.str();
  std::optional<double> error;
  if (instance.locations) {
    error = relative_error(result.locations, *instance.locations);
    doc["relative_error"] = *error;
  }
  emit(g.out, doc.dump(2) + "\n");

  std::ostream& s = summary_stream(g.out);
  s << "status=" << to_string(result.status) << " iterations=" << result.iterations
    << " objective=" << format_real(result.objective);
  if (error) s << " relative_error=" << format_real(*error);
  s << '\n';
  return kExitOk;
}

int cmd_check(const GlobalOptions& g, const CheckOptions& o) {
  const Instance instance = load_instance(o.instance);
  if (!instance.locations) throw InvalidInputError("check needs ground-truth locations in the instance");
  if (!instance.observations.has_labels()) throw InvalidInputError("check needs good/bad labels in the instance");
  double p = 0.0;
  if (o.p) {
    p = *o.p;
  } else if (auto it = instance.metadata.find("p"); it != instance.metadata.end()) {
    p = std::stod(it->second);
  } else {
    throw InvalidInputError("no --p given and the instance metadata has no p");
  }

  const Graph graph = graph_of(instance.observations);
  const std::vector<EdgePair> bad = instance.observations.bad_edges();
  ConditionOptions options;
  options.well_distributed.grid_size = o.grid;
  options.well_distributed.seed = g.seed.value_or(0);

  ConditionReport report;
  if (o.theorem == "highd") {
    report = check_theorem2_conditions(*instance.locations, graph, bad, p, options);
  } else {
    if (instance.observations.dim() != 3) throw InvalidInputError("--theorem 3d needs d = 3");
    const int n = instance.observations.size();
    // Default: the probabilistic instantiation p / (2^18 log n).
    const double beta = o.beta.value_or(p / (std::ldexp(1.0, 18) * std::log(std::max(n, 2))));
    report = check_theorem4_conditions(*instance.locations, graph, bad, p, beta, options);
  }

  json doc = to_json(report);
  doc["instance"] = o.instance;
  doc["options"] = {{"grid_size", o.grid}, {"seed", options.well_distributed.seed}, {"theorem", o.theorem}};
  if (g.out.empty() || g.out == "-") {
    std::cout << (o.format == "json" ? doc.dump(2) + "\n" : to_text(report));
  } else {
    emit(g.out, doc.dump(2) + "\n");
    emit(with_extension(g.out, ".txt"), to_text(report));
    std::cout << "passes=" << (report.passes ? "true" : "false") << '\n';
  }
  return kExitOk;
}

int cmd_experiment(const GlobalOptions& g, ExperimentMode mode, const ExperimentOverrides& o) {
  json j = g.config.empty() ? json::object() : read_json_file(g.config);
  if (j.contains("mode") && j["mode"] != std::string(to_string(mode))) {
    throw InvalidInputError("config mode does not match the subcommand");
  }
  if (g.seed) j["base_seed"] = *g.seed;
  if (!g.out.empty()) j["out_dir"] = g.out;
  if (!o.n_values.empty()) j["n_values"] = o.n_values;
  if (!o.q_values.empty()) j["q_values"] = o.q_values;
  if (o.sigma) j["sigma"] = *o.sigma;
  if (!o.sigma_values.empty()) j["sigma_values"] = o.sigma_values;
  if (o.p) j["p"] = *o.p;
  if (o.d) j["d"] = *o.d;
  if (o.trials) j["trials"] = *o.trials;
  const ExperimentConfig cfg = experiment_config_from_json(j, mode);

  const ExperimentResult result = run_experiment(cfg, g.jobs);
  for (const auto& path : write_experiment_outputs(result)) std::cout << "wrote " << path.string() << '\n';
  for (const CellSummary& c : result.summarize()) {
    std::cout << "n=" << c.n << " q=" << c.q << " sigma=" << c.sigma << " mean_relative_error=" << c.mean_error;
    if (c.refused > 0) std::cout << " refused=" << c.refused;
    std::cout << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location recovery from corrupted pairwise directions"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  app.add_option("--seed", global.seed, "Random seed (generate, check) or experiment base seed");
  app.add_option("--out", global.out, "Output file (generate, solve, check) or directory (experiment)");
  app.add_option("--jobs", global.jobs, "Parallel experiment trials")->check(CLI::PositiveNumber);
  app.add_option("--config", global.config, "JSON config: ExperimentConfig, or SolverConfig for solve");

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic shapefit-v1 instance");
  generate->add_option("--n", gen.n, "Number of locations")->check(CLI::PositiveNumber);
  generate->add_option("--d", gen.d, "Dimension")->check(CLI::Range(2, 1 << 20));
  generate->add_option("--p", gen.p, "Edge probability")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--q", gen.q, "Corruption probability")->check(CLI::Range(0.0, 1.0));
  generate->add_option("--sigma", gen.sigma, "Noise level on good edges")->check(CLI::NonNegativeNumber);
  generate->add_option("--gamma", gen.gamma, "Adversarial corruption with per-vertex cap floor(gamma n)");
  generate->add_option("--strategy", gen.strategy, "Adversary strategy")
      ->check(CLI::IsMember({"random", "self-consistent"}));

  SolveOptions sol;
  auto* solve = app.add_subcommand("solve", "Run the solver on an instance and write JSON");
  solve->add_option("instance", sol.instance, "Instance file")->required();
  solve->add_option("--rho", sol.rho, "Initial penalty")->check(CLI::PositiveNumber);
  solve->add_option("--tol", sol.tol, "Primal and dual residual tolerance")->check(CLI::PositiveNumber);
  solve->add_option("--max-iters", sol.max_iters, "Iteration limit")->check(CLI::NonNegativeNumber);
  solve->add_flag("--no-adapt-rho", sol.no_adapt, "Keep rho fixed");
  solve->add_option("--linear-solve", sol.linear_solve, "t-update method")
      ->check(CLI::IsMember({"automatic", "direct", "conjugate-gradient"}));

  CheckOptions chk;
  auto* check = app.add_subcommand("check", "Measure the recovery conditions of an instance");
  check->add_option("instance", chk.instance, "Instance file with locations and labels")->required();
  check->add_option("--theorem", chk.theorem, "Condition set")->check(CLI::IsMember({"highd", "3d"}));
  check->add_option("--p", chk.p, "Edge probability (default: instance metadata)")->check(CLI::Range(0.0, 1.0));
  check->add_option("--beta", chk.beta, "Angle bound for --theorem 3d")->check(CLI::Range(0.0, 1.0));
  check->add_option("--grid", chk.grid, "Circle grid size for well-distributedness")->check(CLI::PositiveNumber);
  check->add_option("--format", chk.format, "Stdout format without --out")->check(CLI::IsMember({"text", "json"}));

  auto* experiment = app.add_subcommand("experiment", "Batch studies");
  experiment->require_subcommand(1);
  ExperimentOverrides over;
  std::optional<ExperimentMode> mode;
  const auto add_overrides = [&](CLI::App* sub, ExperimentMode m) {
    sub->add_option("--n-values", over.n_values, "Comma-separated n list")->delimiter(',');
    sub->add_option("--q-values", over.q_values, "Comma-separated q list")->delimiter(',');
    sub->add_option("--p", over.p, "Edge probability");
    sub->add_option("--d", over.d, "Dimension");
    sub->add_option("--trials", over.trials, "Trials per cell");
    sub->callback([&mode, m] { mode = m; });
  };
  auto* grid = experiment->add_subcommand("phase-grid", "Mean error over an (n, q) grid");
  add_overrides(grid, ExperimentMode::phase_grid);
  grid->add_option("--sigma", over.sigma, "Noise level");
  auto* sweep = experiment->add_subcommand("noise-sweep", "Mean error against noise level");
  add_overrides(sweep, ExperimentMode::noise_sweep);
  sweep->add_option("--sigma-values", over.sigma_values, "Comma-separated sigma list")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(global, gen);
    if (*solve) return cmd_solve(global, sol);
    if (*check) return cmd_check(global, chk);
    if (*experiment && mode) return cmd_experiment(global, *mode, over);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const InvalidInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DegenerateInputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
