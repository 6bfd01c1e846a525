#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "shapefit/core.hpp"

namespace shapefit {

/// Undirected simple graph on vertices [0, n) with sorted edges i < j.
class Graph {
 public:
  Graph(int n, std::vector<EdgePair> edges);

  int size() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  const std::vector<EdgePair>& edges() const { return edges_; }

  /// Sorted neighbour lists.
  std::vector<std::vector<int>> adjacency() const;
  std::vector<int> degrees() const;
  bool has_edge(int i, int j) const;

 private:
  int n_;
  std::vector<EdgePair> edges_;
};

/// Graph underlying an observation set.
Graph graph_of(const ObservationSet& obs);

/// G(n, p): pair decisions consumed in lexicographic (i, j) order from one
/// seeded stream, so the output is platform-stable.
Graph sample_erdos_renyi(int n, double p, std::uint64_t seed);

bool is_connected(const Graph& g);

/// Number of common neighbours of i and j, given sorted adjacency lists.
int codegree(const std::vector<std::vector<int>>& adjacency, int i, int j);

struct TypicalityReport {
  struct Witness {
    int i = -1;
    int j = -1;  // -1 when the witness is a single vertex
  };

  bool connected = false;
  int min_degree = 0;
  int max_degree = 0;
  int min_codegree = 0;
  int max_codegree = 0;
  double p_used = 0.0;
  bool is_p_typical = false;
  std::optional<Witness> failing_witness;
};

/// Exact degree/codegree/connectivity audit against the p-typical bounds
/// np/2 <= deg <= 2np and np^2/2 <= codeg <= 2np^2 (non-strict).
TypicalityReport check_p_typical(const Graph& g, double p);

}  // namespace shapefit
