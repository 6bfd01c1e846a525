#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "shapefit/core.hpp"
#include "shapefit/graph.hpp"

namespace shapefit {

/// Sines of angles below this are treated as collinear (reported as 0).
inline constexpr double kCollinearTolerance = 1e-10;

// ---------------------------------------------------------------------------
// Well-distributedness
// ---------------------------------------------------------------------------

struct WellDistributedEstimate {
  double c = 0.0;
  /// True when `c` is a proven lower bound on the best constant: the d = 3
  /// circle grid with Lipschitz slack, or the exact evaluation for d = 2.
  bool certified = false;
};

struct WellDistributedOptions {
  int grid_size = 512;           // K, circle points (d = 3)
  int monte_carlo_samples = 4096;  // M, random directions (d > 3)
  std::uint64_t seed = 0;
};

/// Lower bound on the largest c with
///   sum_t |P_{span{t-x, t-y} perp} h| >= c |T| |P_{(x-y) perp} h|  for all h.
/// Points are the columns of `points`. For d = 3 the minimum of the averaged
/// projection norm over K equally spaced unit vectors of the circle in
/// (x-y)-perp, minus the slack pi/K, clamped at 0. For d > 3, an uncertified
/// Monte Carlo minimum over M random unit directions in (x-y)-perp.
WellDistributedEstimate estimate_well_distributed_constant(const Matrix& points,
                                                           const Eigen::Ref<const Vector>& x,
                                                           const Eigen::Ref<const Vector>& y,
                                                           const WellDistributedOptions& options = {});

/// Averaged projection norm (1/|T|) sum_t |P_{span{t-x, t-y} perp} h|. Exposed
/// for tests and fine-grid references.
double mean_span_projection(const Matrix& points, const Eigen::Ref<const Vector>& x,
                            const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& h);

// ---------------------------------------------------------------------------
// Deterministic recovery conditions
// ---------------------------------------------------------------------------

enum class TheoremKind { high_dimensional, three_dimensional };

struct ConditionReport {
  TheoremKind theorem = TheoremKind::high_dimensional;
  TypicalityReport p_typical;
  double p = 0.0;
  /// high-d: min sine over all vertex angles; 3-d: the beta_target input.
  double beta = 0.0;
  /// high-d: min/max edge length ratio; 3-d: max pair length over mu.
  double c0 = 0.0;
  double c1 = 0.0;
  bool c1_certified = false;
  double epsilon = 0.0;  // max_i deg_b(i) / n
  double epsilon0 = 0.0;  // same quantity, 3-d naming
  std::optional<double> epsilon1;  // 3-d only
  double mu = 0.0;
  double mu_inf = 0.0;
  double threshold = 0.0;  // bound on epsilon (epsilon0 for 3-d)
  std::optional<double> threshold_epsilon1;
  /// Conditions 1..6 at indices 0..5.
  std::array<bool, 6> conditions{};
  bool passes = false;

  /// epsilon / threshold; below 1 means headroom.
  double threshold_ratio() const;
};

struct ConditionOptions {
  WellDistributedOptions well_distributed;
};

/// All six high-dimensional conditions and the epsilon threshold
/// beta c0 c1^2 p^4 / (3 * 256 * 64 * 32). Requires d >= 3.
ConditionReport check_theorem2_conditions(const LocationSet& T0, const Graph& g,
                                          std::span<const EdgePair> bad_edges, double p,
                                          const ConditionOptions& options = {});

/// The three-dimensional conditions with thresholds
/// eps0 <= beta c1^2 p^4 / (32 * 3 * 64 * 1024 c0^2) and eps1 <= p / (192 c0).
ConditionReport check_theorem4_conditions(const LocationSet& T0, const Graph& g,
                                          std::span<const EdgePair> bad_edges, double p,
                                          double beta_target, const ConditionOptions& options = {});

/// Minimum over vertex angles of sqrt(1 - <t_ij^, t_ik^>^2), brute force.
double min_angle_sine(const LocationSet& T0);

/// c1 = min over vertex pairs of the well-distributedness constant of their
/// common neighbourhood (0 when a pair has no common neighbour).
WellDistributedEstimate well_distributed_along(const LocationSet& T0, const Graph& g,
                                               const WellDistributedOptions& options = {});

/// max_i deg_b(i) / n.
double max_bad_degree_fraction(int n, std::span<const EdgePair> bad_edges);

nlohmann::json to_json(const ConditionReport& report);
std::string to_text(const ConditionReport& report);

// ---------------------------------------------------------------------------
// Executable inequality oracles
// ---------------------------------------------------------------------------

struct InequalityGap {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds(double slack = 1e-10) const { return lhs >= rhs - slack; }
};

/// Three-point rigidity: with ~delta_ij defined by
/// <v_i - v_j - alpha t_ij, t_ij^> = ~delta_ij |t_ij|,
///   sum_{i<j} |P_{t_ij perp}(v_i - v_j)| >= sqrt(1 - <t_12^, t_23^>^2) |t_12| |~delta_12 - ~delta_13|.
InequalityGap rigidity_triangle_gap(const std::array<Vector, 3>& t, const std::array<Vector, 3>& v,
                                    double alpha);

/// Four-point rigidity:
///   sum over 6 pairs >= (beta/4) |t_12| |~delta_12 - ~delta_34|,
/// beta the min angle sine over triples (i, j, k) with {j, k} != {1, 2}.
InequalityGap rigidity_tetrahedron_gap(const std::array<Vector, 4>& t, const std::array<Vector, 4>& v,
                                       double alpha);

/// Triangles inequality for points T (columns) well distributed with
/// constant c about (x, y), skipping the index set X:
///   sum_{i not in X} |P_{(x-t_i) perp}(h_x - h_i)| + |P_{(t_i-y) perp}(h_i - h_y)|
///     >= (c k - |X|) |P_{(x-y) perp}(h_x - h_y)|.
InequalityGap triangles_inequality_gap(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
                                       const Matrix& points, const Eigen::Ref<const Vector>& h_x,
                                       const Eigen::Ref<const Vector>& h_y, const Matrix& h_points,
                                       std::span<const int> excluded, double c);

struct EtaSums {
  double good = 0.0;      // over E \ E_b
  double bad = 0.0;       // over E_b
  double complete = 0.0;  // over all pairs of K_n
};

/// Rotational magnitudes eta_ij = |P_{t0_ij perp} t_ij| summed over the good
/// edges, the bad edges and all vertex pairs.
EtaSums eta_transfer_diagnostics(const LocationSet& T, const LocationSet& T0, const Graph& g,
                                 std::span<const EdgePair> bad_edges);

}  // namespace shapefit
