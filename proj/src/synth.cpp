#include "shapefit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapefit/random.hpp"

namespace shapefit {

namespace {

Vector exact_direction(const LocationSet& T0, const EdgePair& e) {
  const Vector diff = T0.difference(e.i, e.j);
  const double len = diff.norm();
  if (!(len > 0.0)) {
    throw DegenerateInputError("coincident endpoints on edge (" + std::to_string(e.i) + ", " +
                               std::to_string(e.j) + ")");
  }
  return diff / len;
}

void require_matching(const LocationSet& T0, const Graph& g) {
  if (T0.size() != g.size()) throw InvalidInputError("graph and location set differ in vertex count");
}

}  // namespace

void CorruptionConfig::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidInputError("corruption probability q must lie in [0, 1]");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidInputError("noise scale sigma must be >= 0");
}

std::vector<std::string> AdversaryConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInputError("gamma must lie in [0, 1)");
  std::vector<std::string> warnings;
  if (gamma >= 0.5) {
    warnings.emplace_back("gamma >= 1/2: a vertex may have as many corrupted as uncorrupted edges, "
                          "recovery is information-theoretically impossible");
  }
  return warnings;
}

LocationSet sample_gaussian_locations(int n, int d, std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("sample_gaussian_locations: n must be at least 1");
  if (d < 2) throw InvalidInputError("sample_gaussian_locations: d must be at least 2");
  Rng rng(seed, Stream::locations);
  Matrix pts(d, n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) pts(a, i) = rng.normal();
  }
  return LocationSet::centered(std::move(pts));
}

ObservationSet exact_observations(const LocationSet& T0, const Graph& g) {
  require_matching(T0, g);
  Matrix dirs(T0.dim(), g.edge_count());
  for (int k = 0; k < g.edge_count(); ++k) dirs.col(k) = exact_direction(T0, g.edges()[k]);
  return ObservationSet(g.size(), g.edges(), std::move(dirs),
                        std::vector<EdgeLabel>(g.edges().size(), EdgeLabel::good));
}

ObservationSet corrupt_observations(const LocationSet& T0, const Graph& g, const CorruptionConfig& cfg) {
  cfg.validate();
  require_matching(T0, g);
  const int d = T0.dim();
  Rng flags(cfg.seed, Stream::corruption_flags);
  Rng directions(cfg.seed, Stream::corruption_directions);

  Matrix dirs(d, g.edge_count());
  std::vector<EdgeLabel> labels;
  labels.reserve(g.edges().size());
  for (int k = 0; k < g.edge_count(); ++k) {
    const EdgePair& e = g.edges()[k];
    const Vector exact = exact_direction(T0, e);
    const bool bad = flags.uniform() < cfg.q;
    const Vector z = directions.unit_vector(d);
    Vector v = bad ? z : Vector(exact + cfg.sigma * z);
    const double norm = v.norm();
    // exact + sigma z vanishes only on a measure-zero event (sigma = 1, z = -exact).
    v = norm > 0.0 ? Vector(v / norm) : exact;
    dirs.col(k) = v;
    labels.push_back(bad ? EdgeLabel::bad : EdgeLabel::good);
  }
  return ObservationSet(g.size(), g.edges(), std::move(dirs), std::move(labels));
}

ObservationSet adversarial_bad_set(const LocationSet& T0, const Graph& g, const AdversaryConfig& cfg) {
  cfg.validate();
  require_matching(T0, g);
  const int n = g.size();
  const int d = T0.dim();
  const int cap = static_cast<int>(std::floor(cfg.gamma * n));
  const bool self_consistent = cfg.strategy == AdversaryStrategy::self_consistent;
  if (self_consistent && (cfg.victim < 0 || cfg.victim >= n)) {
    throw InvalidInputError("adversary victim index out of range");
  }

  Vector fake;
  if (self_consistent) {
    if (cfg.fake_location) {
      fake = *cfg.fake_location;
      if (fake.size() != d) throw InvalidInputError("fake location has the wrong dimension");
    } else {
      Rng rng(cfg.seed, Stream::adversary_directions);
      const Matrix centered = T0.matrix().colwise() - T0.mean();
      const double radius = std::sqrt(centered.squaredNorm() / n);
      fake = Vector(T0.point(cfg.victim)) + (radius > 0.0 ? radius : 1.0) * rng.unit_vector(d);
    }
    for (int j = 0; j < n; ++j) {
      if (j != cfg.victim && (fake - T0.point(j)).norm() == 0.0) {
        throw DegenerateInputError("fake location coincides with location " + std::to_string(j));
      }
    }
  }

  // Random processing order; a self-consistent adversary spends its budget on
  // the victim's edges first.
  std::vector<int> order(g.edges().size());
  std::iota(order.begin(), order.end(), 0);
  Rng selection(cfg.seed, Stream::adversary_selection);
  for (std::size_t k = order.size(); k > 1; --k) {
    std::swap(order[k - 1], order[selection.below(k)]);
  }
  if (self_consistent) {
    std::stable_partition(order.begin(), order.end(), [&](int k) {
      const EdgePair& e = g.edges()[k];
      return e.i == cfg.victim || e.j == cfg.victim;
    });
  }

  std::vector<int> bad_degree(static_cast<std::size_t>(n), 0);
  std::vector<EdgeLabel> labels(g.edges().size(), EdgeLabel::good);
  for (const int k : order) {
    const EdgePair& e = g.edges()[k];
    if (bad_degree[e.i] < cap && bad_degree[e.j] < cap) {
      ++bad_degree[e.i];
      ++bad_degree[e.j];
      labels[k] = EdgeLabel::bad;
    }
  }

  Rng outliers(cfg.seed, Stream::corruption_directions);
  Matrix dirs(d, g.edge_count());
  for (int k = 0; k < g.edge_count(); ++k) {
    const EdgePair& e = g.edges()[k];
    if (labels[k] == EdgeLabel::good) {
      dirs.col(k) = exact_direction(T0, e);
    } else if (self_consistent && e.i == cfg.victim) {
      const Vector diff = fake - T0.point(e.j);
      dirs.col(k) = diff / diff.norm();
    } else if (self_consistent && e.j == cfg.victim) {
      const Vector diff = Vector(T0.point(e.i)) - fake;
      dirs.col(k) = diff / diff.norm();
    } else {
      dirs.col(k) = outliers.unit_vector(d);
    }
  }
  return ObservationSet(n, g.edges(), std::move(dirs), std::move(labels));
}

Instance generate_instance(const InstanceParams& params) {
  if (params.n < 1) throw InvalidInputError("n must be at least 1");
  if (params.d < 2) throw InvalidInputError("d must be at least 2");
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw InvalidInputError("p must lie in [0, 1]");
  CorruptionConfig corruption{params.q, params.sigma, mix_seed(params.seed, {3})};
  corruption.validate();

  LocationSet T0 = sample_gaussian_locations(params.n, params.d, mix_seed(params.seed, {1}));
  const Graph g = sample_erdos_renyi(params.n, params.p, mix_seed(params.seed, {2}));
  ObservationSet obs = corrupt_observations(T0, g, corruption);

  std::map<std::string, std::string> meta{
      {"n", std::to_string(params.n)},
      {"d", std::to_string(params.d)},
      {"p", format_real(params.p)},
      {"q", format_real(params.q)},
      {"sigma", format_real(params.sigma)},
      {"seed", std::to_string(params.seed)},
      {"rng", std::string(kRngAlgorithm)},
  };
  return Instance{std::move(T0), std::move(obs), std::move(meta)};
}

}  // namespace shapefit
