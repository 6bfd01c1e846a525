#include "shapefit/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "shapefit/io.hpp"
#include "shapefit/random.hpp"

namespace shapefit {

namespace {

constexpr double kSpanTolerance = 1e-12;

// Unit normal of span{t - x, t - y} orthogonal to q = (x - y)^, or nothing when
// t lies on the line through x and y (the span is then the line itself).
std::optional<Vector> span_second_axis(const Eigen::Ref<const Vector>& t, const Eigen::Ref<const Vector>& x,
                                       const Vector& q) {
  const Vector tx = t - x;
  const Vector r = tx - tx.dot(q) * q;
  const double rn = r.norm();
  if (rn <= kSpanTolerance * tx.norm()) return std::nullopt;
  return Vector(r / rn);
}

// Orthonormal basis (columns) of the complement of unit vector q.
Matrix complement_basis(const Vector& q) {
  const int d = static_cast<int>(q.size());
  Eigen::HouseholderQR<Matrix> qr(q);
  const Matrix full = qr.householderQ() * Matrix::Identity(d, d);
  return full.rightCols(d - 1);
}

// Sine of the angle between unit vectors a and b, |a - <a, b> b|.
double unit_sine(const Vector& a, const Vector& b) { return (a - a.dot(b) * b).norm(); }

double snap_sine(double s) { return s < kCollinearTolerance ? 0.0 : s; }

void require_same_dim(const LocationSet& T0, const Graph& g) {
  if (T0.size() != g.size()) throw InvalidInputError("graph and location set differ in vertex count");
}

struct PairGeometry {
  int n = 0;
  int d = 0;
  Matrix lengths;             // n x n distances
  std::vector<Vector> units;  // units[i * n + j] = t_ij^ (zero when coincident)
  bool distinct = true;

  explicit PairGeometry(const LocationSet& T) : n(T.size()), d(T.dim()), lengths(Matrix::Zero(n, n)) {
    units.assign(static_cast<std::size_t>(n) * n, Vector::Zero(d));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Vector diff = T.difference(i, j);
        const double len = diff.norm();
        lengths(i, j) = len;
        if (len > 0.0) {
          units[idx(i, j)] = diff / len;
        } else {
          distinct = false;
        }
      }
    }
  }

  std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n + j; }
  const Vector& unit(int i, int j) const { return units[idx(i, j)]; }
  bool degenerate(int i, int j) const { return lengths(i, j) == 0.0; }
};

std::vector<int> bad_degrees(int n, std::span<const EdgePair> bad_edges) {
  std::vector<int> deg(static_cast<std::size_t>(n), 0);
  for (const EdgePair& e : bad_edges) {
    if (e.i < 0 || e.j >= n || e.i >= e.j) throw InvalidInputError("bad edge index out of range");
    ++deg[e.i];
    ++deg[e.j];
  }
  return deg;
}

void require_subset(const Graph& g, std::span<const EdgePair> bad_edges) {
  for (const EdgePair& e : bad_edges) {
    if (!g.has_edge(e.i, e.j)) {
      throw InvalidInputError("bad edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                              ") is not an edge of the graph");
    }
  }
}

double mean_edge_length(const PairGeometry& geo, const Graph& g) {
  if (g.edge_count() == 0) return 0.0;
  double total = 0.0;
  for (const EdgePair& e : g.edges()) total += geo.lengths(e.i, e.j);
  return total / g.edge_count();
}

}  // namespace

double mean_span_projection(const Matrix& points, const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& h) {
  const Vector xy = x - y;
  const double len = xy.norm();
  if (!(len > 0.0)) throw DegenerateInputError("well-distributedness: x and y coincide");
  if (points.cols() == 0) throw InvalidInputError("well-distributedness: empty point set");
  const Vector q = xy / len;
  double total = 0.0;
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    Vector r = h - h.dot(q) * q;
    if (const auto axis = span_second_axis(points.col(k), x, q)) r -= r.dot(*axis) * *axis;
    total += r.norm();
  }
  return total / static_cast<double>(points.cols());
}

WellDistributedEstimate estimate_well_distributed_constant(const Matrix& points,
                                                           const Eigen::Ref<const Vector>& x,
                                                           const Eigen::Ref<const Vector>& y,
                                                           const WellDistributedOptions& options) {
  const int d = static_cast<int>(x.size());
  if (y.size() != d || points.rows() != d) throw InvalidInputError("well-distributedness: dimension mismatch");
  if (d < 2) throw InvalidInputError("well-distributedness: need d >= 2");
  if (points.cols() == 0) throw InvalidInputError("well-distributedness: empty point set");
  const Vector xy = x - y;
  const double len = xy.norm();
  if (!(len > 0.0)) throw DegenerateInputError("well-distributedness: x and y coincide");
  const Vector q = xy / len;
  const Matrix basis = complement_basis(q);  // d x (d-1)
  const auto count = static_cast<double>(points.cols());

  // Second span axis of every point, expressed in the complement basis. A unit
  // h in (x-y)-perp then has |P h|^2 = 1 - <h, axis>^2.
  std::vector<Vector> axes;
  int line_points = 0;  // points whose span is the line through x, y
  for (Eigen::Index k = 0; k < points.cols(); ++k) {
    if (const auto axis = span_second_axis(points.col(k), x, q)) {
      axes.emplace_back(basis.transpose() * *axis);
    } else {
      ++line_points;
    }
  }
  const auto mean_at = [&](const Vector& coords) {
    double total = line_points;
    for (const Vector& a : axes) {
      const double s = a.dot(coords);
      total += std::sqrt(std::max(0.0, 1.0 - s * s));
    }
    return total / count;
  };

  WellDistributedEstimate out;
  if (d == 2) {
    // (x-y)-perp is a line; one evaluation is exact.
    out.c = mean_at(Vector::Ones(1));
    out.certified = true;
    return out;
  }
  if (d == 3) {
    const int K = options.grid_size;
    if (K < 16) throw InvalidInputError("well-distributedness: grid size must be at least 16");
    double best = std::numeric_limits<double>::infinity();
    Vector coords(2);
    for (int k = 0; k < K; ++k) {
      const double theta = 2.0 * std::numbers::pi * k / K;
      coords << std::cos(theta), std::sin(theta);
      best = std::min(best, mean_at(coords));
    }
    // Each normalized term is 1-Lipschitz in h and every unit h is within
    // arc length pi/K of a grid point.
    out.c = std::max(0.0, best - std::numbers::pi / K);
    out.certified = true;
    return out;
  }
  if (options.monte_carlo_samples < 1) throw InvalidInputError("well-distributedness: need samples");
  Rng rng(options.seed);
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < options.monte_carlo_samples; ++s) best = std::min(best, mean_at(rng.unit_vector(d - 1)));
  out.c = best;
  out.certified = false;
  return out;
}

double ConditionReport::threshold_ratio() const {
  const double eps = theorem == TheoremKind::three_dimensional ? epsilon0 : epsilon;
  if (threshold > 0.0) return eps / threshold;
  return eps > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

double min_angle_sine(const LocationSet& T0) {
  const PairGeometry geo(T0);
  const int n = geo.n;
  double beta = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      for (int k = j + 1; k < n; ++k) {
        if (k == i) continue;
        if (geo.degenerate(i, j) || geo.degenerate(i, k)) return 0.0;
        beta = std::min(beta, snap_sine(unit_sine(geo.unit(i, j), geo.unit(i, k))));
        if (beta == 0.0) return 0.0;
      }
    }
  }
  return beta;
}

WellDistributedEstimate well_distributed_along(const LocationSet& T0, const Graph& g,
                                               const WellDistributedOptions& options) {
  require_same_dim(T0, g);
  const int n = T0.size();
  const auto adj = g.adjacency();
  WellDistributedEstimate out{std::numeric_limits<double>::infinity(), true};
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      std::vector<int> common;
      std::set_intersection(adj[i].begin(), adj[i].end(), adj[j].begin(), adj[j].end(),
                            std::back_inserter(common));
      if (common.empty() || T0.difference(i, j).norm() == 0.0) return {0.0, out.certified};
      Matrix pts(T0.dim(), static_cast<Eigen::Index>(common.size()));
      for (std::size_t k = 0; k < common.size(); ++k) pts.col(static_cast<Eigen::Index>(k)) = T0.point(common[k]);
      WellDistributedOptions pair_options = options;
      pair_options.seed = mix_seed(options.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      const auto est = estimate_well_distributed_constant(pts, T0.point(i), T0.point(j), pair_options);
      out.c = std::min(out.c, est.c);
      out.certified = out.certified && est.certified;
      if (out.c == 0.0) return out;
    }
  }
  if (!std::isfinite(out.c)) out.c = 0.0;
  return out;
}

double max_bad_degree_fraction(int n, std::span<const EdgePair> bad_edges) {
  const auto deg = bad_degrees(n, bad_edges);
  return static_cast<double>(*std::max_element(deg.begin(), deg.end())) / n;
}

ConditionReport check_theorem2_conditions(const LocationSet& T0, const Graph& g,
                                          std::span<const EdgePair> bad_edges, double p,
                                          const ConditionOptions& options) {
  require_same_dim(T0, g);
  if (T0.dim() < 3) throw InvalidInputError("high-dimensional conditions need d >= 3");
  require_subset(g, bad_edges);
  const int n = T0.size();

  ConditionReport r;
  r.theorem = TheoremKind::high_dimensional;
  r.p = p;
  r.p_typical = check_p_typical(g, p);

  const PairGeometry geo(T0);
  r.beta = min_angle_sine(T0);
  double min_len = std::numeric_limits<double>::infinity();
  double max_len = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      min_len = std::min(min_len, geo.lengths(i, j));
      max_len = std::max(max_len, geo.lengths(i, j));
    }
  }
  r.mu_inf = max_len;
  r.mu = mean_edge_length(geo, g);
  r.c0 = max_len > 0.0 ? min_len / max_len : 0.0;
  r.epsilon = max_bad_degree_fraction(n, bad_edges);
  r.epsilon0 = r.epsilon;
  const auto wd = well_distributed_along(T0, g, options.well_distributed);
  r.c1 = wd.c;
  r.c1_certified = wd.certified;
  r.threshold = r.beta * r.c0 * r.c1 * r.c1 * std::pow(p, 4) / (3.0 * 256.0 * 64.0 * 32.0);

  r.conditions[0] = r.p_typical.is_p_typical;
  r.conditions[1] = r.beta > 0.0;
  r.conditions[2] = r.c0 > 0.0;
  r.conditions[3] = r.epsilon <= r.threshold;
  r.conditions[4] = r.c1 > 0.0;
  r.conditions[5] = geo.distinct;
  r.passes = std::all_of(r.conditions.begin(), r.conditions.end(), [](bool b) { return b; });
  return r;
}

ConditionReport check_theorem4_conditions(const LocationSet& T0, const Graph& g,
                                          std::span<const EdgePair> bad_edges, double p,
                                          double beta_target, const ConditionOptions& options) {
  require_same_dim(T0, g);
  if (T0.dim() != 3) throw InvalidInputError("three-dimensional conditions need d = 3");
  if (!(beta_target > 0.0 && beta_target <= 1.0)) throw InvalidInputError("beta_target must lie in (0, 1]");
  require_subset(g, bad_edges);
  const int n = T0.size();

  ConditionReport r;
  r.theorem = TheoremKind::three_dimensional;
  r.p = p;
  r.beta = beta_target;
  r.p_typical = check_p_typical(g, p);

  const PairGeometry geo(T0);
  double max_len = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) max_len = std::max(max_len, geo.lengths(i, j));
  }
  r.mu_inf = max_len;
  r.mu = mean_edge_length(geo, g);
  r.c0 = r.mu > 0.0 ? max_len / r.mu : std::numeric_limits<double>::infinity();

  // Angle exceptions per pair: indices k whose triangle with (i, j) has a
  // small sine at i or at j.
  const double beta_sq = beta_target * beta_target;
  int worst = 0;
  bool collinear = !geo.distinct;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      int count = 0;
      for (int k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        if (geo.degenerate(i, j) || geo.degenerate(i, k) || geo.degenerate(j, k)) {
          ++count;
          continue;
        }
        const double si = snap_sine(unit_sine(geo.unit(i, j), geo.unit(i, k)));
        const double sj = snap_sine(unit_sine(geo.unit(i, j), geo.unit(j, k)));
        if (si == 0.0 || sj == 0.0) collinear = true;
        if (si * si < beta_sq || sj * sj < beta_sq) ++count;
      }
      worst = std::max(worst, count);
    }
  }
  r.epsilon1 = static_cast<double>(worst) / n;
  r.epsilon = max_bad_degree_fraction(n, bad_edges);
  r.epsilon0 = r.epsilon;
  const auto wd = well_distributed_along(T0, g, options.well_distributed);
  r.c1 = wd.c;
  r.c1_certified = wd.certified;
  r.threshold = beta_target * r.c1 * r.c1 * std::pow(p, 4) /
                (32.0 * 3.0 * 64.0 * 1024.0 * r.c0 * r.c0);
  r.threshold_epsilon1 = p / (192.0 * r.c0);

  r.conditions[0] = r.p_typical.is_p_typical;
  r.conditions[1] = *r.epsilon1 <= *r.threshold_epsilon1;
  r.conditions[2] = std::isfinite(r.c0);
  r.conditions[3] = r.epsilon0 <= r.threshold;
  r.conditions[4] = r.c1 > 0.0;
  r.conditions[5] = !collinear;
  r.passes = std::all_of(r.conditions.begin(), r.conditions.end(), [](bool b) { return b; });
  return r;
}

nlohmann::json to_json(const ConditionReport& r) {
  nlohmann::json typ = {
      {"is_p_typical", r.p_typical.is_p_typical},
      {"connected", r.p_typical.connected},
      {"min_degree", r.p_typical.min_degree},
      {"max_degree", r.p_typical.max_degree},
      {"min_codegree", r.p_typical.min_codegree},
      {"max_codegree", r.p_typical.max_codegree},
      {"p_used", r.p_typical.p_used},
  };
  if (r.p_typical.failing_witness) {
    typ["failing_witness"] = {r.p_typical.failing_witness->i, r.p_typical.failing_witness->j};
  } else {
    typ["failing_witness"] = nullptr;
  }
  nlohmann::json j = {
      {"theorem", r.theorem == TheoremKind::three_dimensional ? "3d" : "highd"},
      {"p", r.p},
      {"p_typical", typ},
      {"beta", r.beta},
      {"c0", r.c0},
      {"c1", r.c1},
      {"c1_certified", r.c1_certified},
      {"epsilon", r.epsilon},
      {"epsilon0", r.epsilon0},
      {"mu", r.mu},
      {"mu_inf", r.mu_inf},
      {"threshold", r.threshold},
      {"threshold_ratio", r.threshold_ratio()},
      {"conditions", r.conditions},
      {"passes", r.passes},
  };
  j["epsilon1"] = r.epsilon1 ? nlohmann::json(*r.epsilon1) : nlohmann::json(nullptr);
  j["threshold_epsilon1"] = r.threshold_epsilon1 ? nlohmann::json(*r.threshold_epsilon1) : nlohmann::json(nullptr);
  return j;
}

std::string to_text(const ConditionReport& r) {
  std::ostringstream os;
  const auto yes = [](bool b) { return b ? "true" : "false"; };
  os << "theorem = " << (r.theorem == TheoremKind::three_dimensional ? "3d" : "highd") << '\n';
  os << "p = " << format_real(r.p) << '\n';
  os << "p_typical = " << yes(r.p_typical.is_p_typical) << " (connected " << yes(r.p_typical.connected)
     << ", degree " << r.p_typical.min_degree << ".." << r.p_typical.max_degree << ", codegree "
     << r.p_typical.min_codegree << ".." << r.p_typical.max_codegree << ")\n";
  os << "beta = " << format_real(r.beta) << '\n';
  os << "c0 = " << format_real(r.c0) << '\n';
  os << "c1 = " << format_real(r.c1) << (r.c1_certified ? " (certified)" : " (monte carlo)") << '\n';
  os << "epsilon = " << format_real(r.epsilon) << '\n';
  os << "epsilon0 = " << format_real(r.epsilon0) << '\n';
  os << "epsilon1 = " << (r.epsilon1 ? format_real(*r.epsilon1) : std::string("n/a")) << '\n';
  os << "mu = " << format_real(r.mu) << '\n';
  os << "mu_inf = " << format_real(r.mu_inf) << '\n';
  os << "threshold = " << format_real(r.threshold) << '\n';
  if (r.threshold_epsilon1) os << "threshold_epsilon1 = " << format_real(*r.threshold_epsilon1) << '\n';
  os << "threshold_ratio = " << format_real(r.threshold_ratio()) << '\n';
  for (std::size_t c = 0; c < r.conditions.size(); ++c) {
    os << "condition_" << c + 1 << " = " << yes(r.conditions[c]) << '\n';
  }
  os << "passes = " << yes(r.passes) << '\n';
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

template <std::size_t N>
void require_distinct(const std::array<Vector, N>& t, const std::array<Vector, N>& v) {
  const auto d = t[0].size();
  if (d < 2) throw InvalidInputError("rigidity oracle needs d >= 2");
  for (std::size_t a = 0; a < N; ++a) {
    if (t[a].size() != d || v[a].size() != d) throw InvalidInputError("rigidity oracle: dimension mismatch");
    for (std::size_t b = a + 1; b < N; ++b) {
      if ((t[a] - t[b]).norm() == 0.0) throw DegenerateInputError("rigidity oracle: coincident points");
    }
  }
}

// ~delta_ij from <v_i - v_j - alpha t_ij, t_ij^> = ~delta_ij |t_ij|.
template <std::size_t N>
double relative_stretch(const std::array<Vector, N>& t, const std::array<Vector, N>& v, double alpha, int i,
                        int j) {
  const Vector tij = t[i] - t[j];
  return (v[i] - v[j] - alpha * tij).dot(tij) / tij.squaredNorm();
}

template <std::size_t N>
double rotational_sum(const std::array<Vector, N>& t, const std::array<Vector, N>& v) {
  double total = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = i + 1; j < N; ++j) total += project_off(v[i] - v[j], t[i] - t[j]).norm();
  }
  return total;
}

}  // namespace

InequalityGap rigidity_triangle_gap(const std::array<Vector, 3>& t, const std::array<Vector, 3>& v,
                                    double alpha) {
  require_distinct(t, v);
  const Vector t12 = t[0] - t[1];
  const Vector t23 = t[1] - t[2];
  const double sine = unit_sine(t12.normalized(), t23.normalized());
  InequalityGap gap;
  gap.lhs = rotational_sum(t, v);
  gap.rhs = sine * t12.norm() *
            std::abs(relative_stretch(t, v, alpha, 0, 1) - relative_stretch(t, v, alpha, 0, 2));
  return gap;
}

InequalityGap rigidity_tetrahedron_gap(const std::array<Vector, 4>& t, const std::array<Vector, 4>& v,
                                       double alpha) {
  require_distinct(t, v);
  double beta = 1.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        if (i == j || i == k) continue;
        if (j <= 1 && k <= 1) continue;  // {j, k} = {1, 2}
        beta = std::min(beta, unit_sine((t[i] - t[j]).normalized(), (t[i] - t[k]).normalized()));
      }
    }
  }
  InequalityGap gap;
  gap.lhs = rotational_sum(t, v);
  gap.rhs = beta / 4.0 * (t[0] - t[1]).norm() *
            std::abs(relative_stretch(t, v, alpha, 0, 1) - relative_stretch(t, v, alpha, 2, 3));
  return gap;
}

InequalityGap triangles_inequality_gap(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                                       const Matrix& points, const Eigen::Ref<const Vector>& h_x,
                                       const Eigen::Ref<const Vector>& h_y, const Matrix& h_points,
                                       std::span<const int> excluded, double c) {
  const auto d = x.size();
  if (d < 3) throw InvalidInputError("triangles inequality needs d >= 3");
  if (y.size() != d || h_x.size() != d || h_y.size() != d || points.rows() != d || h_points.rows() != d ||
      points.cols() != h_points.cols()) {
    throw InvalidInputError("triangles inequality: dimension mismatch");
  }
  const auto k = static_cast<int>(points.cols());
  std::vector<char> skip(static_cast<std::size_t>(k), 0);
  for (const int idx : excluded) {
    if (idx < 0 || idx >= k) throw InvalidInputError("excluded index outside [0, k)");
    if (skip[idx]) throw InvalidInputError("excluded index repeated");
    skip[idx] = 1;
  }
  InequalityGap gap;
  for (int i = 0; i < k; ++i) {
    if (skip[i]) continue;
    const Vector ti = points.col(i);
    const Vector hi = h_points.col(i);
    gap.lhs += project_off(h_x - hi, x - ti).norm() + project_off(hi - h_y, ti - y).norm();
  }
  gap.rhs = (c * k - static_cast<double>(excluded.size())) * project_off(h_x - h_y, x - y).norm();
  return gap;
}

EtaSums eta_transfer_diagnostics(const LocationSet& T, const LocationSet& T0, const Graph& g,
                                 std::span<const EdgePair> bad_edges) {
  if (T.size() != T0.size() || T.dim() != T0.dim()) throw InvalidInputError("eta diagnostics: size mismatch");
  require_same_dim(T0, g);
  require_subset(g, bad_edges);
  const std::set<EdgePair> bad(bad_edges.begin(), bad_edges.end());
  const int n = T.size();
  EtaSums sums;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vector ref = T0.difference(i, j);
      if (ref.norm() == 0.0) throw DegenerateInputError("eta diagnostics: coincident reference points");
      const double eta = project_off(T.difference(i, j), ref).norm();
      sums.complete += eta;
      if (bad.contains({i, j})) {
        sums.bad += eta;
      } else if (g.has_edge(i, j)) {
        sums.good += eta;
      }
    }
  }
  return sums;
}

}  // namespace shapefit
