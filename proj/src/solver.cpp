#include "shapefit/solver.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "shapefit/graph.hpp"
#include "shapefit/random.hpp"

namespace shapefit {

namespace {

constexpr std::uint64_t kInitSeed = 0x5348415045464954ULL;
constexpr int kDirectLimit = 3000;
constexpr int kRhoInterval = 50;
constexpr int kMeritWindow = 100;
constexpr int kMeritStart = 500;

// Locations are flattened vertex-major: vertex i occupies [i d, (i + 1) d).
// Internally the scale constraint is L(tau) = kappa = |E| so edge quantities
// are O(1); t = tau / kappa on return.
class SplitProblem {
 public:
  explicit SplitProblem(const ObservationSet& obs)
      : obs_(obs), n_(obs.size()), d_(obs.dim()), m_(obs.edge_count()), kappa_(obs.edge_count()) {
    grad_ = Vector::Zero(static_cast<Eigen::Index>(n_) * d_);
    for (int k = 0; k < m_; ++k) {
      const EdgePair& e = obs_.edge(k);
      grad_.segment(e.i * d_, d_) += obs_.direction(k);
      grad_.segment(e.j * d_, d_) -= obs_.direction(k);
    }
    grad_norm_sq_ = grad_.squaredNorm();
  }

  int n() const { return n_; }
  int d() const { return d_; }
  int m() const { return m_; }
  int dn() const { return n_ * d_; }
  double kappa() const { return kappa_; }
  const Vector& grad() const { return grad_; }
  double grad_norm_sq() const { return grad_norm_sq_; }

  // y_e = P_{v_e perp}(tau_i - tau_j).
  void apply_A(const Vector& tau, Matrix& y) const {
    y.resize(d_, m_);
    for (int k = 0; k < m_; ++k) {
      const EdgePair& e = obs_.edge(k);
      const auto v = obs_.direction(k);
      const Vector diff = tau.segment(e.i * d_, d_) - tau.segment(e.j * d_, d_);
      y.col(k) = diff - diff.dot(v) * v;
    }
  }

  Vector apply_At(const Matrix& z) const {
    Vector out = Vector::Zero(dn());
    for (int k = 0; k < m_; ++k) {
      const EdgePair& e = obs_.edge(k);
      const auto v = obs_.direction(k);
      const Vector pz = z.col(k) - z.col(k).dot(v) * v;
      out.segment(e.i * d_, d_) += pz;
      out.segment(e.j * d_, d_) -= pz;
    }
    return out;
  }

  Vector apply_M(const Vector& x) const {
    Matrix y;
    apply_A(x, y);
    return apply_At(y);
  }

  Matrix dense_M() const {
    Matrix M = Matrix::Zero(dn(), dn());
    for (int k = 0; k < m_; ++k) {
      const EdgePair& e = obs_.edge(k);
      const Vector v = obs_.direction(k);
      const Matrix P = Matrix::Identity(d_, d_) - v * v.transpose();
      M.block(e.i * d_, e.i * d_, d_, d_) += P;
      M.block(e.j * d_, e.j * d_, d_, d_) += P;
      M.block(e.i * d_, e.j * d_, d_, d_) -= P;
      M.block(e.j * d_, e.i * d_, d_, d_) -= P;
    }
    return M;
  }

  // Removes the per-coordinate mean; grad is already mean-free, so the two
  // constraint blocks have orthogonal rows.
  void remove_mean(Vector& x) const {
    Eigen::Map<Matrix> pts(x.data(), d_, n_);
    const Vector mean = pts.rowwise().mean();
    pts.colwise() -= mean;
  }

  void project_null(Vector& x) const {
    remove_mean(x);
    x -= (grad_.dot(x) / grad_norm_sq_) * grad_;
  }

  void project_feasible(Vector& tau) const {
    remove_mean(tau);
    tau += ((kappa_ - grad_.dot(tau)) / grad_norm_sq_) * grad_;
  }

  Vector initial_point(std::uint64_t seed) const {
    Rng rng(seed, Stream::solver_init);
    Vector tau(dn());
    for (Eigen::Index a = 0; a < tau.size(); ++a) tau[a] = rng.normal();
    project_feasible(tau);
    return tau;
  }

  LocationSet to_locations(Vector tau) const {
    project_feasible(tau);
    tau /= kappa_;
    return LocationSet::centered(Eigen::Map<const Matrix>(tau.data(), d_, n_));
  }

 private:
  const ObservationSet& obs_;
  int n_;
  int d_;
  int m_;
  double kappa_;
  Vector grad_;
  double grad_norm_sq_ = 0.0;
};

// t-update: argmin (1/2)|A tau - b|^2 + (prox/2)|tau - tau_prev|^2 over the
// affine set {mean(tau) = 0, L(tau) = kappa}.
class TUpdate {
 public:
  virtual ~TUpdate() = default;
  virtual Vector solve(const Matrix& b, const Vector& tau_prev) = 0;
  virtual double prox() const = 0;
};

// Bordered KKT system reduced once to an explicit affine map
// tau = F (A^T b + prox tau_prev) + f0. F = (I - Y S^-1 C) H^-1 with
// H = M + gamma C^T C (+ prox I), Y = H^-1 C^T and S = C Y.
class DirectTUpdate final : public TUpdate {
 public:
  explicit DirectTUpdate(const SplitProblem& prob) : prob_(prob) {
    const int dn = prob.dn();
    const int n = prob.n();
    const int d = prob.d();
    const Matrix M = prob.dense_M();

    // Constraint rows normalized to unit length: d centering rows and L's gradient.
    Matrix Ct = Matrix::Zero(dn, d + 1);
    for (int i = 0; i < n; ++i) Ct.block(i * d, 0, d, d) = Matrix::Identity(d, d) / std::sqrt(n);
    const double gnorm = std::sqrt(prob.grad_norm_sq());
    Ct.col(d) = prob.grad() / gnorm;
    Vector c = Vector::Zero(d + 1);
    c[d] = prob.kappa() / gnorm;

    const double gamma = std::max(1.0, 2.0 * prob.m() / n);
    Matrix H = M + gamma * Ct * Ct.transpose();
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
      // Connected but not parallel rigid: the minimizer is not unique and H is
      // singular. A proximal term keeps the update well posed.
      prox_ = 1e-3 * gamma;
      H.diagonal().array() += prox_;
      llt.compute(H);
    }
    const Matrix Y = llt.solve(Ct);
    const Matrix S = Ct.transpose() * Y;
    const Eigen::LDLT<Matrix> s_fact(S);
    const Matrix Hinv = llt.solve(Matrix::Identity(dn, dn));
    F_ = Hinv - Y * s_fact.solve(Y.transpose());
    // The gamma C^T c term of the augmented right-hand side folds into f0.
    const Vector aug = gamma * Ct * c;
    f0_ = F_ * aug + Y * s_fact.solve(c);
  }

  Vector solve(const Matrix& b, const Vector& tau_prev) override {
    Vector rhs = prob_.apply_At(b);
    if (prox_ > 0.0) rhs += prox_ * tau_prev;
    Vector tau = F_ * rhs + f0_;
    prob_.project_feasible(tau);
    return tau;
  }

  double prox() const override { return prox_; }

 private:
  const SplitProblem& prob_;
  Matrix F_;
  Vector f0_;
  double prox_ = 0.0;
};

// Matrix-free conjugate gradient in the null space of the constraints,
// warm-started at the previous (feasible) iterate.
class CgTUpdate final : public TUpdate {
 public:
  CgTUpdate(const SplitProblem& prob, double tol) : prob_(prob), tol_(tol) {
    prox_ = 1e-8 * std::max(1.0, 2.0 * prob.m() / prob.n());
  }

  Vector solve(const Matrix& b, const Vector& tau_prev) override {
    // Minimize over delta in null(C): (1/2)|A(tau_prev + delta) - b|^2 + (prox/2)|delta|^2.
    const Vector atb = prob_.apply_At(b);
    const Vector mt = prob_.apply_M(tau_prev);
    Vector r = atb - mt;
    prob_.project_null(r);
    Vector delta = Vector::Zero(r.size());
    Vector p = r;
    double rr = r.squaredNorm();
    // Near the fixed point r is a small difference of O(|A^T b|) terms; asking
    // for more than roundoff allows makes the recurrence drift.
    const double floor = 1e-13 * (atb.norm() + mt.norm());
    const double stop = std::max(tol_ * tol_ * rr, floor * floor);
    const int max_steps = 10 * prob_.dn();
    for (int step = 0; step < max_steps && rr > stop; ++step) {
      Vector Ap = prob_.apply_M(p) + prox_ * p;
      prob_.project_null(Ap);
      const double curvature = p.dot(Ap);
      // Underflow near an exact fixed point; the increment is already negligible.
      if (!(curvature > 0.0) || !std::isfinite(curvature)) break;
      const double alpha = rr / curvature;
      delta += alpha * p;
      r -= alpha * Ap;
      const double rr_next = r.squaredNorm();
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
    Vector tau = tau_prev + delta;
    prob_.project_feasible(tau);
    return tau;
  }

  double prox() const override { return prox_; }

 private:
  const SplitProblem& prob_;
  double tol_;
  double prox_;
};

double shrink_norms(const Matrix& y, const Matrix& u, double rho, const ObservationSet& obs, Matrix& z) {
  z.resize(y.rows(), y.cols());
  double total = 0.0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) {
    const auto v = obs.direction(static_cast<int>(k));
    Vector w = y.col(k) + u.col(k);
    w -= w.dot(v) * v;
    const double norm = w.norm();
    const double scale = norm > 0.0 ? std::max(0.0, 1.0 - 1.0 / (rho * norm)) : 0.0;
    z.col(k) = scale * w;
    total += scale * norm;
  }
  return total;
}

SolverResult infeasible(const ObservationSet& obs, std::string message) {
  SolverResult result{LocationSet::centered(Matrix::Zero(obs.dim(), obs.size()))};
  result.status = SolverStatus::infeasible_input;
  result.message = std::move(message);
  return result;
}

std::optional<std::string> feasibility_problem(const ObservationSet& obs) {
  if (obs.size() < 2) return "need at least two vertices";
  if (obs.edge_count() < 1) return "need at least one edge";
  if (!is_connected(graph_of(obs))) return "observation graph is disconnected";
  return std::nullopt;
}

void fill_constraints(SolverResult& result, const ObservationSet& obs) {
  result.objective = objective_R(result.locations, obs);
  result.constraint_violation.scale = std::abs(constraint_L(result.locations, obs).total - 1.0);
  result.constraint_violation.centering = result.locations.mean().norm();
}

}  // namespace

void SolverConfig::validate() const {
  if (!(rho > 0.0)) throw InvalidInputError("rho must be positive");
  if (!(tol_primal > 0.0) || !(tol_dual > 0.0)) throw InvalidInputError("tolerances must be positive");
  if (max_iters < 0) throw InvalidInputError("max_iters must be non-negative");
  if (!(cg_tol > 0.0)) throw InvalidInputError("cg_tol must be positive");
}

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::converged:
      return "converged";
    case SolverStatus::max_iters:
      return "max-iters";
    case SolverStatus::infeasible_input:
      return "infeasible-input";
  }
  return "unknown";
}

SolverResult solve_shapefit(const ObservationSet& obs, const SolverConfig& config) {
  config.validate();
  if (auto problem = feasibility_problem(obs)) return infeasible(obs, *problem);
  const SplitProblem prob(obs);
  if (prob.grad_norm_sq() <= 1e-24 * prob.m()) {
    return infeasible(obs, "L(T) vanishes identically; the scale constraint cannot be met");
  }

  LinearSolveMethod method = config.linear_solve;
  if (method == LinearSolveMethod::automatic) {
    method = prob.dn() <= kDirectLimit ? LinearSolveMethod::direct : LinearSolveMethod::conjugate_gradient;
  }
  std::unique_ptr<TUpdate> t_update;
  if (method == LinearSolveMethod::direct) {
    t_update = std::make_unique<DirectTUpdate>(prob);
  } else {
    t_update = std::make_unique<CgTUpdate>(prob, config.cg_tol);
  }

  const double rms_scale = std::sqrt(static_cast<double>(prob.m()) * prob.d());
  double rho = config.rho;
  Vector tau = prob.initial_point(kInitSeed);
  Matrix y;
  prob.apply_A(tau, y);
  Matrix z = y;
  Matrix u = Matrix::Zero(y.rows(), y.cols());
  Matrix z_old;

  Vector best_tau = tau;
  double best_objective = y.colwise().norm().sum();
  double primal = std::numeric_limits<double>::infinity();
  double dual = std::numeric_limits<double>::infinity();
  double z_norm_sum = 0.0;
  int last_rho_change = 0;
  int window_start_iter = -1;
  double window_start_merit = 0.0;
  int merit_violations = 0;
  SolverStatus status = SolverStatus::max_iters;
  int iter = 0;

  while (iter < config.max_iters) {
    ++iter;
    tau = t_update->solve(z - u, tau);
    prob.apply_A(tau, y);
    z_old = z;
    z_norm_sum = shrink_norms(y, u, rho, obs, z);
    u += y - z;

    primal = (y - z).norm() / rms_scale;
    Vector dual_vec = prob.apply_At(z - z_old);
    prob.project_null(dual_vec);
    dual = rho * dual_vec.norm() / rms_scale;

    const double objective = y.colwise().norm().sum();
    if (objective < best_objective) {
      best_objective = objective;
      best_tau = tau;
    }

    // Augmented-Lagrangian merit over fixed-rho windows; increases are only
    // counted, never acted upon.
    if (iter >= kMeritStart) {
      const double merit = z_norm_sum + 0.5 * rho * ((y - z + u).squaredNorm() - u.squaredNorm());
      if (iter - window_start_iter >= kMeritWindow || window_start_iter < 0) {
        if (window_start_iter >= 0 && last_rho_change <= window_start_iter &&
            merit > window_start_merit + 1e-9 * std::max(1.0, std::abs(window_start_merit))) {
          ++merit_violations;
        }
        window_start_iter = iter;
        window_start_merit = merit;
      }
    }

    if (primal <= config.tol_primal && dual <= config.tol_dual) {
      status = SolverStatus::converged;
      break;
    }
    if (config.adapt_rho && iter - last_rho_change >= kRhoInterval) {
      if (primal > 10.0 * dual) {
        rho *= 2.0;
        u /= 2.0;
        last_rho_change = iter;
      } else if (dual > 10.0 * primal) {
        rho /= 2.0;
        u *= 2.0;
        last_rho_change = iter;
      }
    }
  }

  const Vector& chosen = status == SolverStatus::converged ? tau : best_tau;
  SolverResult result{prob.to_locations(chosen)};
  result.status = status;
  result.iterations = iter;
  result.primal_residual = primal;
  result.dual_residual = dual;
  result.split_objective = z.colwise().norm().sum() / prob.kappa();
  result.final_rho = rho;
  result.merit_window_violations = merit_violations;
  result.proximal_regularization = t_update->prox() > 0.0;
  result.linear_solve = method;
  fill_constraints(result, obs);
  if (status == SolverStatus::max_iters) {
    result.message = "iteration limit reached; returning the best feasible iterate";
  }
  return result;
}

SolverResult reference_subgradient(const ObservationSet& obs, long long iters, double step0) {
  if (iters < 0) throw InvalidInputError("iteration count must be non-negative");
  if (!(step0 > 0.0)) throw InvalidInputError("step0 must be positive");
  if (auto problem = feasibility_problem(obs)) return infeasible(obs, *problem);

  // Written against ObservationSet directly, sharing no code with the
  // splitting solver beyond the problem definition.
  const int n = obs.size();
  const int d = obs.dim();
  const int m = obs.edge_count();
  const double kappa = m;

  Matrix grad = Matrix::Zero(d, n);
  for (int k = 0; k < m; ++k) {
    grad.col(obs.edge(k).i) += obs.direction(k);
    grad.col(obs.edge(k).j) -= obs.direction(k);
  }
  const double grad_sq = grad.squaredNorm();
  if (grad_sq <= 1e-24 * m) return infeasible(obs, "L(T) vanishes identically; the scale constraint cannot be met");

  const auto project = [&](Matrix& T) {
    T.colwise() -= T.rowwise().mean();
    T += ((kappa - (grad.array() * T.array()).sum()) / grad_sq) * grad;
  };
  const auto objective = [&](const Matrix& T) {
    double total = 0.0;
    for (int k = 0; k < m; ++k) {
      const Vector diff = T.col(obs.edge(k).i) - T.col(obs.edge(k).j);
      total += project_orthogonal(diff, obs.direction(k)).norm();
    }
    return total;
  };

  Rng rng(kInitSeed ^ 0xA5A5A5A5A5A5A5A5ULL);
  Matrix T(d, n);
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < d; ++a) T(a, i) = rng.normal();
  }
  project(T);
  Matrix best = T;
  double best_value = objective(T);

  // Each pass evaluates R at the current iterate while assembling its
  // subgradient, then steps; the last iterate is scored after the loop.
  Matrix g(d, n);
  Vector diff(d);
  for (long long k = 1; k <= iters; ++k) {
    g.setZero();
    double value = 0.0;
    for (int e = 0; e < m; ++e) {
      const int i = obs.edge(e).i;
      const int j = obs.edge(e).j;
      const auto v = obs.direction(e);
      diff = T.col(i) - T.col(j);
      diff -= diff.dot(v) * v;
      const double len = diff.norm();
      value += len;
      if (len <= 1e-14) continue;
      diff /= len;
      g.col(i) += diff;
      g.col(j) -= diff;
    }
    if (value < best_value) {
      best_value = value;
      best = T;
    }
    T -= (step0 / std::sqrt(static_cast<double>(k))) * g;
    project(T);
  }
  if (objective(T) < best_value) best = T;

  best /= kappa;
  SolverResult result{LocationSet::centered(best)};
  result.status = SolverStatus::converged;
  result.iterations = static_cast<int>(std::min<long long>(iters, std::numeric_limits<int>::max()));
  result.message = "projected subgradient reference";
  fill_constraints(result, obs);
  result.split_objective = result.objective;
  return result;
}

nlohmann::json to_json(const SolverResult& result) {
  nlohmann::json locations = nlohmann::json::array();
  for (int i = 0; i < result.locations.size(); ++i) {
    nlohmann::json pt = nlohmann::json::array();
    for (int a = 0; a < result.locations.dim(); ++a) pt.push_back(result.locations.point(i)[a]);
    locations.push_back(std::move(pt));
  }
  return {
      {"status", std::string(to_string(result.status))},
      {"objective", result.objective},
      {"iterations", result.iterations},
      {"primal_residual", result.primal_residual},
      {"dual_residual", result.dual_residual},
      {"constraint_violation", {result.constraint_violation.scale, result.constraint_violation.centering}},
      {"message", result.message},
      {"final_rho", result.final_rho},
      {"locations", std::move(locations)},
  };
}

}  // namespace shapefit
