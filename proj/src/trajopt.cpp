#include "memmo/trajopt.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace memmo {

namespace {

/// Block-tridiagonal symmetric system: diag[i] (DxD), upper[i] couples block i to i+1.
struct BlockTridiagonal {
  std::vector<Matrix> diag;
  std::vector<Matrix> upper;

  BlockTridiagonal(int blocks, int dim) : diag(blocks, Matrix::Zero(dim, dim)),
                                          upper(std::max(blocks - 1, 0), Matrix::Zero(dim, dim)) {}

  /// Block LDL^T forward/backward sweep. Returns false when a pivot block is not SPD.
  bool Solve(const Vector& rhs, Vector& x) const {
    const int n = static_cast<int>(diag.size());
    const int d = static_cast<int>(diag.front().rows());
    std::vector<Eigen::LLT<Matrix>> pivots(static_cast<std::size_t>(n));
    std::vector<Matrix> lower(static_cast<std::size_t>(n));
    Vector y = rhs;
    for (int i = 0; i < n; ++i) {
      Matrix c = diag[static_cast<std::size_t>(i)];
      if (i > 0) {
        // L_i = U_{i-1}^T C_{i-1}^{-1}
        lower[static_cast<std::size_t>(i)] =
            pivots[static_cast<std::size_t>(i - 1)].solve(upper[static_cast<std::size_t>(i - 1)]).transpose();
        c -= lower[static_cast<std::size_t>(i)] * upper[static_cast<std::size_t>(i - 1)];
        y.segment(i * d, d) -= lower[static_cast<std::size_t>(i)] * y.segment((i - 1) * d, d);
      }
      pivots[static_cast<std::size_t>(i)].compute(c);
      if (pivots[static_cast<std::size_t>(i)].info() != Eigen::Success) return false;
    }
    x.resize(rhs.size());
    for (int i = n - 1; i >= 0; --i) {
      Vector r = y.segment(i * d, d);
      if (i + 1 < n) r -= upper[static_cast<std::size_t>(i)] * x.segment((i + 1) * d, d);
      x.segment(i * d, d) = pivots[static_cast<std::size_t>(i)].solve(r);
    }
    return true;
  }
};

/// Penalized objective over the free configurations. q_0 is always fixed; q_T is
/// fixed for configuration goals and free (with a tip penalty) for Cartesian goals.
class PenaltyProblem {
 public:
  PenaltyProblem(const Problem& problem, const SolverOptions& options)
      : problem_(problem),
        env_(*problem.env),
        options_(options),
        dof_(env_.dof()),
        first_free_(1),
        last_free_(problem.cartesian() ? problem.steps : problem.steps - 1) {}

  int free_blocks() const { return std::max(last_free_ - first_free_ + 1, 0); }
  bool is_free(int t) const { return t >= first_free_ && t <= last_free_; }
  int block(int t) const { return t - first_free_; }

  struct Violation {
    double collision = 0.0;
    double limits = 0.0;
    double terminal = 0.0;
  };

  bool Feasible(const Violation& v) const {
    return v.collision <= options_.collision_tolerance && v.limits <= options_.limit_tolerance &&
           v.terminal <= options_.terminal_tolerance;
  }

  double Objective(const Path& path, double mu, Violation* violation = nullptr) const {
    const double cost = PathCost(path);
    double penalty = 0.0;
    Violation v;
    for (int t = 0; t < problem_.steps; ++t) {
      const double depth = std::max(0.0, -SweptSignedDistance(env_, path.at(t), path.at(t + 1)));
      penalty += depth * depth;
      v.collision = std::max(v.collision, depth);
    }
    for (int t = first_free_; t <= last_free_; ++t) {
      for (int i = 0; i < dof_; ++i) {
        const double excess = LimitExcess(path.at(t)[i], i);
        penalty += excess * excess;
        v.limits = std::max(v.limits, std::abs(excess));
      }
    }
    if (problem_.cartesian()) {
      const Vector2 r = TipResidual(path);
      penalty += r.squaredNorm();
      v.terminal = r.norm();
    }
    if (violation != nullptr) *violation = v;
    return cost + mu * penalty;
  }

  /// Gradient and Gauss-Newton Hessian of the penalized objective.
  void Linearize(const Path& path, double mu, Vector& grad, BlockTridiagonal& hess) const {
    const int nb = free_blocks();
    grad = Vector::Zero(nb * dof_);
    for (auto& m : hess.diag) m.setZero();
    for (auto& m : hess.upper) m.setZero();

    // smoothness term
    for (int t = first_free_; t <= last_free_; ++t) {
      const int b = block(t);
      Vector g = 2.0 * (path.at(t) - path.at(t - 1));
      double diag = 2.0;
      if (t < problem_.steps) {
        g += 2.0 * (path.at(t) - path.at(t + 1));
        diag += 2.0;
      }
      grad.segment(b * dof_, dof_) += g;
      hess.diag[static_cast<std::size_t>(b)].diagonal().array() += diag;
      if (t + 1 <= last_free_) {
        hess.upper[static_cast<std::size_t>(b)].diagonal().array() -= 2.0;
      }
    }

    // collision hinge on each swept step
    for (int t = 0; t < problem_.steps; ++t) {
      const bool free_a = is_free(t);
      const bool free_b = is_free(t + 1);
      if (!free_a && !free_b) continue;
      const double depth = -SweptSignedDistance(env_, path.at(t), path.at(t + 1));
      if (depth <= 0.0) continue;
      const Vector n = SweptGradient(path, t);
      const Vector na = n.head(dof_);
      const Vector n_next = n.tail(dof_);
      if (free_a) {
        const int b = block(t);
        grad.segment(b * dof_, dof_) -= 2.0 * mu * depth * na;
        hess.diag[static_cast<std::size_t>(b)] += 2.0 * mu * na * na.transpose();
      }
      if (free_b) {
        const int b = block(t + 1);
        grad.segment(b * dof_, dof_) -= 2.0 * mu * depth * n_next;
        hess.diag[static_cast<std::size_t>(b)] += 2.0 * mu * n_next * n_next.transpose();
      }
      if (free_a && free_b) hess.upper[static_cast<std::size_t>(block(t))] += 2.0 * mu * na * n_next.transpose();
    }

    // joint limits
    for (int t = first_free_; t <= last_free_; ++t) {
      const int b = block(t);
      for (int i = 0; i < dof_; ++i) {
        const double excess = LimitExcess(path.at(t)[i], i);
        if (excess == 0.0) continue;
        grad[b * dof_ + i] += 2.0 * mu * excess;
        hess.diag[static_cast<std::size_t>(b)](i, i) += 2.0 * mu;
      }
    }

    if (problem_.cartesian()) {
      const int b = block(problem_.steps);
      const Vector2 r = TipResidual(path);
      const auto jac = TipJacobian(env_, path.back());
      grad.segment(b * dof_, dof_) += 2.0 * mu * jac.transpose() * r;
      hess.diag[static_cast<std::size_t>(b)] += 2.0 * mu * jac.transpose() * jac;
    }
  }

  /// Norm of the cost gradient left after projecting out the best non-negative
  /// combination of near-active constraint gradients (first-order KKT residual).
  double KktResidual(const Path& path) const {
    const int nb = free_blocks();
    const int n = nb * dof_;
    Vector cost_grad = Vector::Zero(n);
    for (int t = first_free_; t <= last_free_; ++t) {
      Vector g = 2.0 * (path.at(t) - path.at(t - 1));
      if (t < problem_.steps) g += 2.0 * (path.at(t) - path.at(t + 1));
      cost_grad.segment(block(t) * dof_, dof_) = g;
    }
    std::vector<Vector> columns;
    for (int t = 0; t < problem_.steps; ++t) {
      const bool free_a = is_free(t);
      const bool free_b = is_free(t + 1);
      if (!free_a && !free_b) continue;
      if (SweptSignedDistance(env_, path.at(t), path.at(t + 1)) > options_.active_margin) continue;
      const Vector nrm = SweptGradient(path, t);
      Vector col = Vector::Zero(n);
      if (free_a) col.segment(block(t) * dof_, dof_) += nrm.head(dof_);
      if (free_b) col.segment(block(t + 1) * dof_, dof_) += nrm.tail(dof_);
      columns.push_back(std::move(col));
    }
    for (int t = first_free_; t <= last_free_; ++t) {
      for (int i = 0; i < dof_; ++i) {
        const auto& lim = env_.limits()[static_cast<std::size_t>(i)];
        const double q = path.at(t)[i];
        if (q - lim.lo <= options_.active_margin) {
          columns.push_back(Vector::Unit(n, block(t) * dof_ + i));
        }
        if (lim.hi - q <= options_.active_margin) {
          columns.push_back(-Vector::Unit(n, block(t) * dof_ + i));
        }
      }
    }
    if (problem_.cartesian()) {
      const auto jac = TipJacobian(env_, path.back());
      for (int k = 0; k < 2; ++k) {
        Vector col = Vector::Zero(n);
        col.segment(block(problem_.steps) * dof_, dof_) = jac.row(k).transpose();
        columns.push_back(col);
        columns.push_back(-col);
      }
    }
    if (columns.empty()) return cost_grad.norm();

    // Non-negative least squares by projected coordinate descent on the Gram system.
    const int m = static_cast<int>(columns.size());
    Matrix a(n, m);
    for (int j = 0; j < m; ++j) a.col(j) = columns[static_cast<std::size_t>(j)];
    const Matrix gram = a.transpose() * a;
    const Vector rhs = a.transpose() * cost_grad;
    Vector lambda = Vector::Zero(m);
    Vector g_lambda = Vector::Zero(m);  // gram * lambda
    for (int sweep = 0; sweep < 2000; ++sweep) {
      double change = 0.0;
      for (int j = 0; j < m; ++j) {
        if (gram(j, j) <= 1e-30) continue;
        const double updated = std::max(0.0, lambda[j] + (rhs[j] - g_lambda[j]) / gram(j, j));
        const double delta = updated - lambda[j];
        if (delta != 0.0) {
          g_lambda += delta * gram.col(j);
          lambda[j] = updated;
          change = std::max(change, std::abs(delta) * std::sqrt(gram(j, j)));
        }
      }
      if (change < 1e-12) break;
    }
    return (cost_grad - a * lambda).norm();
  }

  void ApplyStep(const Path& from, const Vector& step, double alpha, Path& to) const {
    to = from;
    for (int t = first_free_; t <= last_free_; ++t) {
      to.at(t) += alpha * step.segment(block(t) * dof_, dof_);
    }
  }

  void ClampToLimits(Path& path) const {
    for (int t = first_free_; t <= last_free_; ++t) {
      for (int i = 0; i < dof_; ++i) {
        const auto& lim = env_.limits()[static_cast<std::size_t>(i)];
        path.at(t)[i] = std::clamp(path.at(t)[i], lim.lo, lim.hi);
      }
    }
  }

 private:
  double LimitExcess(double q, int i) const {
    const auto& lim = env_.limits()[static_cast<std::size_t>(i)];
    if (q > lim.hi) return q - lim.hi;
    if (q < lim.lo) return q - lim.lo;
    return 0.0;
  }

  Vector2 TipResidual(const Path& path) const {
    return ForwardKinematics(env_, path.back()).tip - std::get<Vector2>(problem_.terminal);
  }

  /// Central finite differences of the swept signed distance of step t with
  /// respect to (q_t, q_{t+1}).
  Vector SweptGradient(const Path& path, int t) const {
    Vector a = path.at(t);
    Vector b = path.at(t + 1);
    Vector g(2 * dof_);
    const double h = options_.fd_step;
    for (int side = 0; side < 2; ++side) {
      Vector& z = side == 0 ? a : b;
      for (int i = 0; i < dof_; ++i) {
        const double keep = z[i];
        z[i] = keep + h;
        const double up = SweptSignedDistance(env_, a, b);
        z[i] = keep - h;
        const double down = SweptSignedDistance(env_, a, b);
        z[i] = keep;
        g[side * dof_ + i] = (up - down) / (2.0 * h);
      }
    }
    return g;
  }

  const Problem& problem_;
  const Environment& env_;
  const SolverOptions& options_;
  int dof_;
  int first_free_;
  int last_free_;
};

}  // namespace

std::string ToString(Termination t) {
  switch (t) {
    case Termination::kConverged:
      return "converged";
    case Termination::kMaxIter:
      return "max_iter";
    case Termination::kPenaltyStalled:
      return "penalty_stalled";
    case Termination::kCancelled:
      return "cancelled";
  }
  return "?";
}

void Problem::Validate() const {
  if (!env) throw InputError("Problem: missing environment");
  if (steps < 1) throw InputError("Problem: steps must be at least 1");
  if (q_init.size() != env->dof()) throw InputError("Problem: q_init dimension mismatch");
  if (const auto* goal = std::get_if<Configuration>(&terminal)) {
    if (goal->size() != env->dof()) throw InputError("Problem: goal dimension mismatch");
  } else if (env->kind() != EnvKind::kArm) {
    throw InputError("Problem: Cartesian goals need an arm environment");
  }
}

double PathCost(const Path& path) {
  double cost = 0.0;
  for (int t = 0; t < path.steps(); ++t) cost += (path.at(t + 1) - path.at(t)).squaredNorm();
  return cost;
}

bool IsValid(const Problem& problem, const Path& path) {
  problem.Validate();
  const Environment& env = *problem.env;
  if (path.dof() != env.dof() || path.steps() != problem.steps) return false;
  if ((path.front() - problem.q_init).cwiseAbs().maxCoeff() > kValidEndpointTolerance) return false;
  if (const auto* goal = std::get_if<Configuration>(&problem.terminal)) {
    if ((path.back() - *goal).cwiseAbs().maxCoeff() > kValidEndpointTolerance) return false;
  } else {
    const Vector2 tip = ForwardKinematics(env, path.back()).tip;
    if ((tip - std::get<Vector2>(problem.terminal)).norm() > kValidEndpointTolerance) return false;
  }
  for (int t = 0; t <= path.steps(); ++t) {
    if (!env.WithinLimits(path.at(t))) return false;
  }
  for (int t = 0; t <= path.steps(); ++t) {
    if (SignedDistance(env, path.at(t)) < -kValidClearanceTolerance) return false;
    if (t < path.steps() &&
        SweptSignedDistance(env, path.at(t), path.at(t + 1)) < -kValidClearanceTolerance) {
      return false;
    }
  }
  return true;
}

SolveResult Solve(const Problem& problem, const Path& warm_start, const SolverOptions& options,
                  std::stop_token stop) {
  const auto started = std::chrono::steady_clock::now();
  problem.Validate();
  if (warm_start.dof() != problem.env->dof() || warm_start.steps() != problem.steps) {
    throw InputError("Solve: warm start shape does not match the problem");
  }
  const PenaltyProblem pp(problem, options);

  SolveResult result;
  Path path = warm_start;
  path.at(0) = problem.q_init;
  if (const auto* goal = std::get_if<Configuration>(&problem.terminal)) path.at(problem.steps) = *goal;

  double mu = options.initial_penalty;
  BlockTridiagonal hess(pp.free_blocks(), problem.env->dof());
  Vector grad;
  Vector step;
  Path trial;
  PenaltyProblem::Violation violation;
  result.termination = Termination::kMaxIter;

  if (pp.free_blocks() == 0) {
    result.termination = Termination::kConverged;
  } else {
    while (true) {
      if (stop.stop_requested()) {
        result.termination = Termination::kCancelled;
        break;
      }
      const double objective = pp.Objective(path, mu, &violation);
      pp.Linearize(path, mu, grad, hess);
      if (!std::isfinite(objective) || !grad.allFinite()) {
        throw SolverError("Solve: non-finite objective or gradient at iteration " +
                          std::to_string(result.iterations) + " (penalty " + std::to_string(mu) + ")");
      }
      const double gnorm = grad.norm();
      const bool feasible = pp.Feasible(violation);
      if (feasible &&
          (gnorm <= options.gradient_tolerance || pp.KktResidual(path) <= options.gradient_tolerance)) {
        result.termination = Termination::kConverged;
        break;
      }

      bool subproblem_done = gnorm <= options.gradient_tolerance;
      if (!subproblem_done) {
        if (result.iterations >= options.max_iterations) {
          result.termination = Termination::kMaxIter;
          break;
        }
        if (!hess.Solve(-grad, step)) {
          throw SolverError("Solve: Gauss-Newton system is not positive definite");
        }
        const double slope = grad.dot(step);
        double alpha = 1.0;
        bool accepted = false;
        double trial_objective = objective;
        for (int ls = 0; ls < options.max_line_search; ++ls, alpha *= 0.5) {
          pp.ApplyStep(path, step, alpha, trial);
          trial_objective = pp.Objective(trial, mu);
          if (trial_objective <= objective + 1e-4 * alpha * slope && trial_objective < objective) {
            accepted = true;
            break;
          }
        }
        if (accepted) {
          path = trial;
          ++result.iterations;
          result.objective_trace.push_back(trial_objective);
          result.penalty_trace.push_back(mu);
          continue;
        }
        subproblem_done = true;
      }

      // The subproblem is stationary (or no descent is possible).
      if (feasible) {
        result.termination = Termination::kConverged;
        break;
      }
      if (mu >= options.max_penalty) {
        result.termination = Termination::kPenaltyStalled;
        break;
      }
      mu = std::min(mu * options.penalty_growth, options.max_penalty);
    }
  }

  pp.ClampToLimits(path);
  pp.Objective(path, mu, &violation);
  result.max_violation = std::max({violation.collision, violation.limits, violation.terminal});
  result.final_penalty = mu;
  result.cost = PathCost(path);
  result.path = std::move(path);
  result.valid = IsValid(problem, result.path);
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace memmo
