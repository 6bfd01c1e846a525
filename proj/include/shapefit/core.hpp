#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shapefit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Library-wide tolerances, roughly 100x double epsilon scale.
inline constexpr double kUnitTolerance = 1e-12;
inline constexpr double kCenteringTolerance = 1e-12;
inline constexpr double kReconstructionTolerance = 1e-10;
inline constexpr double kAlignmentTolerance = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: dimension mismatch, non-unit directions, bad ranges.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input on which the operation is undefined (zero-length
/// reference edge, coincident points, all-equal configuration).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Undirected edge between vertices i < j.
struct EdgePair {
  int i = 0;
  int j = 0;
  auto operator<=>(const EdgePair&) const = default;
};

enum class EdgeLabel { good, bad };

/// n points in R^d stored as the columns of a d x n matrix. Column index is
/// vertex identity.
class LocationSet {
 public:
  explicit LocationSet(Matrix points);

  /// Subtracts the empirical mean and flags the result as centered.
  static LocationSet centered(Matrix points);

  int dim() const { return static_cast<int>(points_.rows()); }
  int size() const { return static_cast<int>(points_.cols()); }
  bool is_centered() const { return centered_; }

  auto point(int i) const { return points_.col(i); }
  const Matrix& matrix() const { return points_; }

  Vector mean() const { return points_.rowwise().mean(); }
  /// Difference t_i - t_j.
  Vector difference(int i, int j) const { return points_.col(i) - points_.col(j); }

 private:
  Matrix points_;
  bool centered_ = false;
};

/// Graph edges carrying unit direction observations v_ij, plus optional
/// ground-truth labels for synthetic instances.
class ObservationSet {
 public:
  /// `directions` is d x |E|, column k observing edges[k]. Throws
  /// InvalidInputError naming the offending edge when an invariant fails.
  ObservationSet(int n, std::vector<EdgePair> edges, Matrix directions,
                 std::optional<std::vector<EdgeLabel>> labels = std::nullopt);

  int size() const { return n_; }
  int dim() const { return static_cast<int>(directions_.rows()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::vector<EdgePair>& edges() const { return edges_; }
  const EdgePair& edge(int k) const { return edges_[static_cast<std::size_t>(k)]; }
  auto direction(int k) const { return directions_.col(k); }
  const Matrix& directions() const { return directions_; }

  bool has_labels() const { return labels_.has_value(); }
  const std::optional<std::vector<EdgeLabel>>& labels() const { return labels_; }

  /// Edges labelled bad; empty when unlabelled.
  std::vector<EdgePair> bad_edges() const;
  int bad_count() const;

 private:
  int n_;
  std::vector<EdgePair> edges_;
  Matrix directions_;
  std::optional<std::vector<EdgeLabel>> labels_;
};

/// t_ij = (1 + delta) t0_ij + eta s, with s a unit vector orthogonal to t0_ij.
/// s is absent when eta == 0.
struct EdgeDecomposition {
  double delta = 0.0;
  double eta = 0.0;
  std::optional<Vector> s;

  Vector reconstruct(const Vector& t0_ij) const;
};

/// Least-squares similarity t_i ~ alpha (t0_i + w).
struct ShapeAlignment {
  double alpha = 0.0;
  Vector w;
  double residual = 0.0;

  bool alpha_positive() const { return alpha > 0.0; }
};

/// h - <h, v> v for unit v.
Vector project_orthogonal(const Eigen::Ref<const Vector>& h, const Eigen::Ref<const Vector>& v);

/// Projection of h onto the orthogonal complement of span{u}, for any u.
/// Returns h unchanged when u is zero.
Vector project_off(const Eigen::Ref<const Vector>& h, const Eigen::Ref<const Vector>& u);

/// R(T) = sum over edges of |P_{v_ij perp}(t_i - t_j)|.
double objective_R(const LocationSet& T, const ObservationSet& obs);

struct LinearConstraintValue {
  double total = 0.0;
  Vector per_edge;  // l_ij = <t_i - t_j, v_ij>
};

/// L(T) = sum over edges of <t_i - t_j, v_ij>, with the per-edge terms.
LinearConstraintValue constraint_L(const LocationSet& T, const ObservationSet& obs);

EdgeDecomposition decompose_edge(const Eigen::Ref<const Vector>& t_ij,
                                 const Eigen::Ref<const Vector>& t0_ij);

/// Unconstrained least squares over (alpha, w). The sign of alpha is reported,
/// not constrained; a negative optimum indicates a reflected recovery.
ShapeAlignment align_shapes(const LocationSet& T, const LocationSet& T0);

/// | T/|T|_F - T0/|T0|_F |_F after centering both inputs. Lies in [0, 2].
double relative_error(const LocationSet& T, const LocationSet& T0);

}  // namespace shapefit
