#pragma once

#include <initializer_list>
#include <vector>

#include "shapefit/core.hpp"
#include "shapefit/graph.hpp"
#include "shapefit/random.hpp"

namespace shapefit::testing {

inline Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v[k++] = x;
  return v;
}

inline Matrix random_matrix(Rng& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) m.col(j) = rng.gaussian_vector(rows);
  return m;
}

inline std::vector<EdgePair> complete_edges(int n) {
  std::vector<EdgePair> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  }
  return edges;
}

// An edge whose removal disconnects g. Bridged graphs admit a collapsed
// feasible point with zero objective, so they make poor oracle instances.
inline bool has_bridge(const Graph& g) {
  const auto& edges = g.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    std::vector<EdgePair> rest;
    for (std::size_t l = 0; l < edges.size(); ++l) {
      if (l != k) rest.push_back(edges[l]);
    }
    if (!is_connected(Graph(g.size(), rest))) return true;
  }
  return false;
}

}  // namespace shapefit::testing
