#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>
#include <string_view>

#include "shapefit/core.hpp"

namespace shapefit {

/// Identifier of the random generation scheme, recorded in output metadata.
/// Engine: std::mt19937_64 (fully specified by the C++ standard). Uniforms take
/// the top 53 bits; normals use the Box-Muller transform; bounded integers use
/// rejection sampling. Sub-streams are seeded through SplitMix64. None of the
/// std:: distribution objects are used, since their algorithms are
/// implementation-defined.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64+splitmix64-streams+u53+box-muller";

std::uint64_t splitmix64(std::uint64_t x);

/// Order-sensitive 64-bit mix of a base seed with further integers.
std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts);

/// Named sub-streams of one instance seed.
enum class Stream : std::uint64_t {
  locations = 1,
  graph = 2,
  corruption_flags = 3,
  corruption_directions = 4,
  adversary_selection = 5,
  adversary_directions = 6,
  solver_init = 7,
};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  /// Uniform direction on the unit sphere in R^d (normalized Gaussian).
  Vector unit_vector(int d);
  Vector gaussian_vector(int d);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace shapefit
