#include "shapefit/random.hpp"

#include <cmath>
#include <numbers>

namespace shapefit {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = splitmix64(base);
  for (const std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
  return h;
}

Rng::Rng(std::uint64_t seed, Stream stream)
    : engine_(mix_seed(seed, {static_cast<std::uint64_t>(stream)})) {}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound);
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) return x % bound;
  }
}

Vector Rng::gaussian_vector(int d) {
  Vector g(d);
  for (int a = 0; a < d; ++a) g[a] = normal();
  return g;
}

Vector Rng::unit_vector(int d) {
  for (;;) {
    Vector g = gaussian_vector(d);
    const double norm = g.norm();
    if (norm > 1e-300) return g / norm;
  }
}

}  // namespace shapefit
