#include "shapefit/core.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <utility>

namespace shapefit {

namespace {

std::string edge_name(const EdgePair& e) {
  std::ostringstream os;
  os << "(" << e.i << ", " << e.j << ")";
  return os.str();
}

void require_compatible(const LocationSet& T, const ObservationSet& obs) {
  if (T.dim() != obs.dim()) {
    throw InvalidInputError("location dimension " + std::to_string(T.dim()) +
                            " does not match observation dimension " +
                            std::to_string(obs.dim()));
  }
  if (T.size() != obs.size()) {
    throw InvalidInputError("location count " + std::to_string(T.size()) +
                            " does not match observation vertex count " +
                            std::to_string(obs.size()));
  }
}

}  // namespace

LocationSet::LocationSet(Matrix points) : points_(std::move(points)) {
  if (points_.cols() < 1) throw InvalidInputError("a location set needs at least one point");
  if (points_.rows() < 1) throw InvalidInputError("location dimension must be positive");
  if (!points_.allFinite()) throw InvalidInputError("location set contains non-finite values");
}

LocationSet LocationSet::centered(Matrix points) {
  LocationSet out(std::move(points));
  const Vector mean = out.points_.rowwise().mean();
  out.points_.colwise() -= mean;
  const double scale = out.points_.colwise().norm().maxCoeff();
  const double bound = scale > 0.0 ? kCenteringTolerance * scale : kCenteringTolerance;
  if (out.points_.rowwise().mean().norm() > bound) {
    throw DegenerateInputError("centering failed to reach tolerance");
  }
  out.centered_ = true;
  return out;
}

ObservationSet::ObservationSet(int n, std::vector<EdgePair> edges, Matrix directions,
                               std::optional<std::vector<EdgeLabel>> labels)
    : n_(n), edges_(std::move(edges)), directions_(std::move(directions)), labels_(std::move(labels)) {
  if (n_ < 1) throw InvalidInputError("observation set needs at least one vertex");
  if (directions_.cols() != static_cast<Eigen::Index>(edges_.size())) {
    throw InvalidInputError("direction count does not match edge count");
  }
  if (directions_.rows() < 1) throw InvalidInputError("direction dimension must be positive");
  if (labels_ && labels_->size() != edges_.size()) {
    throw InvalidInputError("labels must cover every edge exactly once");
  }
  std::set<EdgePair> seen;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    const EdgePair& e = edges_[k];
    if (e.i == e.j) throw InvalidInputError("self-loop at edge " + edge_name(e));
    if (e.i > e.j) throw InvalidInputError("edge " + edge_name(e) + " must satisfy i < j");
    if (e.i < 0 || e.j >= n_) throw InvalidInputError("edge " + edge_name(e) + " has an index out of range");
    if (!seen.insert(e).second) throw InvalidInputError("duplicate edge " + edge_name(e));
    const double norm = directions_.col(static_cast<Eigen::Index>(k)).norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kUnitTolerance) {
      std::ostringstream os;
      os.precision(17);
      os << "direction on edge " << edge_name(e) << " is not a unit vector (norm " << norm << ")";
      throw InvalidInputError(os.str());
    }
  }
}

std::vector<EdgePair> ObservationSet::bad_edges() const {
  std::vector<EdgePair> out;
  if (!labels_) return out;
  for (std::size_t k = 0; k < edges_.size(); ++k) {
    if ((*labels_)[k] == EdgeLabel::bad) out.push_back(edges_[k]);
  }
  return out;
}

int ObservationSet::bad_count() const { return static_cast<int>(bad_edges().size()); }

Vector EdgeDecomposition::reconstruct(const Vector& t0_ij) const {
  Vector out = (1.0 + delta) * t0_ij;
  if (s) out += eta * *s;
  return out;
}

Vector project_orthogonal(const Eigen::Ref<const Vector>& h, const Eigen::Ref<const Vector>& v) {
  if (h.size() != v.size()) {
    throw InvalidInputError("project_orthogonal: dimension mismatch");
  }
  if (std::abs(v.norm() - 1.0) > kUnitTolerance) {
    throw InvalidInputError("project_orthogonal: direction is not a unit vector");
  }
  return h - h.dot(v) * v;
}

Vector project_off(const Eigen::Ref<const Vector>& h, const Eigen::Ref<const Vector>& u) {
  const double uu = u.squaredNorm();
  if (uu == 0.0) return h;
  return h - (h.dot(u) / uu) * u;
}

double objective_R(const LocationSet& T, const ObservationSet& obs) {
  require_compatible(T, obs);
  double total = 0.0;
  for (int k = 0; k < obs.edge_count(); ++k) {
    const EdgePair& e = obs.edge(k);
    const Vector diff = T.difference(e.i, e.j);
    const auto v = obs.direction(k);
    total += (diff - diff.dot(v) * v).norm();
  }
  return total;
}

LinearConstraintValue constraint_L(const LocationSet& T, const ObservationSet& obs) {
  require_compatible(T, obs);
  LinearConstraintValue out;
  out.per_edge.resize(obs.edge_count());
  for (int k = 0; k < obs.edge_count(); ++k) {
    const EdgePair& e = obs.edge(k);
    out.per_edge[k] = T.difference(e.i, e.j).dot(obs.direction(k));
  }
  out.total = out.per_edge.sum();
  return out;
}

EdgeDecomposition decompose_edge(const Eigen::Ref<const Vector>& t_ij,
                                 const Eigen::Ref<const Vector>& t0_ij) {
  if (t_ij.size() != t0_ij.size()) throw InvalidInputError("decompose_edge: dimension mismatch");
  const double ref_sq = t0_ij.squaredNorm();
  if (!(ref_sq > 0.0)) throw DegenerateInputError("decompose_edge: zero reference edge");

  EdgeDecomposition out;
  out.delta = t_ij.dot(t0_ij) / ref_sq - 1.0;
  const Vector rotational = t_ij - (t_ij.dot(t0_ij) / ref_sq) * t0_ij;
  out.eta = rotational.norm();
  if (out.eta > 0.0) out.s = rotational / out.eta;
  return out;
}

ShapeAlignment align_shapes(const LocationSet& T, const LocationSet& T0) {
  if (T.size() != T0.size() || T.dim() != T0.dim()) {
    throw InvalidInputError("align_shapes: location sets differ in size or dimension");
  }
  const Vector mean = T.mean();
  const Vector mean0 = T0.mean();
  const Matrix dev = T.matrix().colwise() - mean;
  const Matrix dev0 = T0.matrix().colwise() - mean0;
  const double spread0 = dev0.squaredNorm();
  if (!(spread0 > 0.0)) throw DegenerateInputError("align_shapes: reference points are all equal");

  // In (alpha, b = alpha w) the problem is linear least squares; the
  // optimum separates into a scalar regression and a mean match.
  ShapeAlignment out;
  out.alpha = (dev.array() * dev0.array()).sum() / spread0;
  const Vector offset = mean - out.alpha * mean0;
  if (out.alpha != 0.0) {
    out.w = offset / out.alpha;
    out.residual = (dev - out.alpha * dev0).norm();
  } else {
    // alpha (t0 + w) is identically zero; report the fit of the zero shape.
    out.w = Vector::Zero(T.dim());
    out.residual = T.matrix().norm();
  }
  return out;
}

double relative_error(const LocationSet& T, const LocationSet& T0) {
  if (T.size() != T0.size() || T.dim() != T0.dim()) {
    throw InvalidInputError("relative_error: location sets differ in size or dimension");
  }
  const Matrix a = T.matrix().colwise() - T.mean();
  const Matrix b = T0.matrix().colwise() - T0.mean();
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DegenerateInputError("relative_error: zero-norm configuration");
  return (a / na - b / nb).norm();
}

}  // namespace shapefit
