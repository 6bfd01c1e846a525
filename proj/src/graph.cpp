#include "shapefit/graph.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "shapefit/random.hpp"

namespace shapefit {

Graph::Graph(int n, std::vector<EdgePair> edges) : n_(n), edges_(std::move(edges)) {
  if (n_ < 1) throw InvalidInputError("graph needs at least one vertex");
  std::sort(edges_.begin(), edges_.end());
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const EdgePair& e = edges_[k];
    if (e.i >= e.j) throw InvalidInputError("graph edges must satisfy i < j");
    if (e.i < 0 || e.j >= n_) throw InvalidInputError("graph edge index out of range");
    if (k > 0 && edges_[k - 1] == e) throw InvalidInputError("duplicate graph edge");
  }
}

std::vector<std::vector<int>> Graph::adjacency() const {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n_));
  for (const EdgePair& e : edges_) {
    adj[e.i].push_back(e.j);
    adj[e.j].push_back(e.i);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

std::vector<int> Graph::degrees() const {
  std::vector<int> deg(static_cast<std::size_t>(n_), 0);
  for (const EdgePair& e : edges_) {
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

bool Graph::has_edge(int i, int j) const {
  if (i > j) std::swap(i, j);
  return std::binary_search(edges_.begin(), edges_.end(), EdgePair{i, j});
}

Graph graph_of(const ObservationSet& obs) { return Graph(obs.size(), obs.edges()); }

Graph sample_erdos_renyi(int n, double p, std::uint64_t seed) {
  if (n < 1) throw InvalidInputError("sample_erdos_renyi: n must be at least 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("sample_erdos_renyi: p must lie in [0, 1]");
  Rng rng(seed, Stream::graph);
  std::vector<EdgePair> edges;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.uniform() < p) edges.push_back({i, j});
    }
  }
  return Graph(n, std::move(edges));
}

namespace {

// First vertex not reachable from vertex 0, or -1 when connected.
int first_unreached(const Graph& g) {
  const auto adj = g.adjacency();
  std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const int w : adj[u]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  if (reached == g.size()) return -1;
  return static_cast<int>(std::find(seen.begin(), seen.end(), 0) - seen.begin());
}

}  // namespace

bool is_connected(const Graph& g) { return first_unreached(g) < 0; }

int codegree(const std::vector<std::vector<int>>& adjacency, int i, int j) {
  const auto& a = adjacency[i];
  const auto& b = adjacency[j];
  int count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

TypicalityReport check_p_typical(const Graph& g, double p) {
  const int n = g.size();
  if (n < 2) throw InvalidInputError("check_p_typical: need at least two vertices");
  if (!(p > 0.0 && p <= 1.0)) throw InvalidInputError("check_p_typical: p must lie in (0, 1]");

  TypicalityReport report;
  report.p_used = p;
  const int unreached = first_unreached(g);
  report.connected = unreached < 0;

  const double deg_lo = 0.5 * n * p;
  const double deg_hi = 2.0 * n * p;
  const double codeg_lo = 0.5 * n * p * p;
  const double codeg_hi = 2.0 * n * p * p;

  const auto deg = g.degrees();
  report.min_degree = *std::min_element(deg.begin(), deg.end());
  report.max_degree = *std::max_element(deg.begin(), deg.end());
  bool ok = report.connected;
  if (!report.connected) report.failing_witness = TypicalityReport::Witness{unreached, -1};
  for (int i = 0; i < n && ok; ++i) {
    if (deg[i] < deg_lo || deg[i] > deg_hi) {
      ok = false;
      report.failing_witness = TypicalityReport::Witness{i, -1};
    }
  }

  const auto adj = g.adjacency();
  report.min_codegree = std::numeric_limits<int>::max();
  report.max_codegree = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const int c = codegree(adj, i, j);
      report.min_codegree = std::min(report.min_codegree, c);
      report.max_codegree = std::max(report.max_codegree, c);
      if (ok && (c < codeg_lo || c > codeg_hi)) {
        ok = false;
        report.failing_witness = TypicalityReport::Witness{i, j};
      }
    }
  }
  report.is_p_typical = ok;
  return report;
}

}  // namespace shapefit
