#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shapefit/core.hpp"
#include "shapefit/graph.hpp"
#include "shapefit/io.hpp"

namespace shapefit {

/// Bernoulli(q) corruption with uniform-direction outliers and Gaussian noise
/// of scale sigma on the uncorrupted edges.
struct CorruptionConfig {
  double q = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class AdversaryStrategy { random, self_consistent };

/// Degree-capped corruption: every vertex keeps at most floor(gamma n) bad
/// edges.
struct AdversaryConfig {
  double gamma = 0.0;
  AdversaryStrategy strategy = AdversaryStrategy::random;
  std::uint64_t seed = 0;
  /// Alternative location w for the victim vertex (self-consistent only).
  /// Defaults to the victim's location moved by one RMS radius in a random
  /// direction.
  std::optional<Vector> fake_location;
  int victim = 0;

  /// Returns warnings (gamma >= 1/2 is past the information-theoretic limit);
  /// throws for gamma outside [0, 1).
  std::vector<std::string> validate() const;
};

/// n i.i.d. standard Gaussian points in R^d, centered.
LocationSet sample_gaussian_locations(int n, int d, std::uint64_t seed);

/// Exact directions t0_ij / |t0_ij| on every edge, all labelled good.
ObservationSet exact_observations(const LocationSet& T0, const Graph& g);

/// Per edge: with probability q the observation is a uniform unit vector z_ij
/// (bad), otherwise the exact direction plus sigma z_ij (good); then
/// normalized. Corruption flags and z_ij come from separate streams, so
/// changing sigma leaves the corruption pattern and the z_ij unchanged.
ObservationSet corrupt_observations(const LocationSet& T0, const Graph& g, const CorruptionConfig& cfg);

/// Greedy random bad-edge selection under the per-vertex cap floor(gamma n).
ObservationSet adversarial_bad_set(const LocationSet& T0, const Graph& g, const AdversaryConfig& cfg);

/// One synthetic trial: Gaussian locations, G(n, p) and Bernoulli corruption,
/// each drawn from its own stream of `seed`.
struct InstanceParams {
  int n = 0;
  int d = 3;
  double p = 0.5;
  double q = 0.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

Instance generate_instance(const InstanceParams& params);

}  // namespace shapefit
