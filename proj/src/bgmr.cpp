#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>

#include "memmo/approximators.hpp"

namespace memmo {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double LogSumExp(const Eigen::Ref<const Vector>& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

/// k-means++ seeding followed by Lloyd iterations; returns a label per row.
std::vector<int> KMeans(const Matrix& z, int k, Rng& rng, Exec exec) {
  const Eigen::Index n = z.rows();
  Matrix centers(k, z.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = z.row(first(rng));
  Vector nearest = SquaredDistances(z, centers.topRows(1), exec).col(0);
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (pick = 0; pick < n - 1; ++pick) {
        u -= nearest[pick];
        if (u < 0.0) break;
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = z.row(pick);
    nearest = nearest.cwiseMin(SquaredDistances(z, centers.row(c), exec).col(0));
  }
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < 100; ++iter) {
    const Matrix d = SquaredDistances(z, centers, exec);
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      d.row(i).minCoeff(&best);
      if (label[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        label[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sum = Matrix::Zero(k, z.cols());
    Vector count = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sum.row(label[static_cast<std::size_t>(i)]) += z.row(i);
      count[label[static_cast<std::size_t>(i)]] += 1.0;
    }
    for (int c = 0; c < k; ++c) {
      if (count[c] > 0.0) centers.row(c) = sum.row(c) / count[c];
    }
  }
  return label;
}

/// Variational posterior over weights, means and precisions of every component.
struct Posterior {
  Vector alpha;
  Vector beta;
  Matrix means;  // K x d
  std::vector<Matrix> scatter;  // W_k^{-1}
  Vector nu;
};

}  // namespace

BgmrModel BgmrModel::Fit(const Matrix& X, const Matrix& Y, const BgmrOptions& options) {
  if (X.rows() != Y.rows()) throw InputError("bgmr: X and Y row counts differ");
  if (X.rows() < 2) throw InputError("bgmr: needs at least two rows");
  if (X.cols() < 1 || Y.cols() < 1) throw InputError("bgmr: empty input or output");
  if (options.max_components < 1) throw InputError("bgmr: max_components must be positive");
  if (!(options.mean_precision > 0.0) || !(options.extra_dof > 0.0) || !(options.prior_scale > 0.0) ||
      !(options.variance_floor > 0.0)) {
    throw InputError("bgmr: prior hyperparameters must be positive");
  }
  RequireFinite(X, "bgmr X");
  RequireFinite(Y, "bgmr Y");

  const Eigen::Index n = X.rows();
  Matrix z(n, X.cols() + Y.cols());
  z << X, Y;
  const Eigen::Index d = z.cols();
  const int k_count = static_cast<int>(std::min<Eigen::Index>(options.max_components, n));
  const double dd = static_cast<double>(d);

  const double alpha0 = options.weight_concentration > 0.0 ? options.weight_concentration
                                                           : 1.0 / options.max_components;
  const double beta0 = options.mean_precision;
  const double nu0 = dd + options.extra_dof;
  const Vector m0 = z.colwise().mean();
  const Vector var = (z.rowwise() - m0.transpose()).array().square().colwise().mean();
  Matrix scatter0 = Matrix::Zero(d, d);
  scatter0.diagonal() = options.prior_scale * var.array() + options.variance_floor;

  Rng rng(options.seed);
  const auto labels = KMeans(z, k_count, rng, options.exec);
  Matrix resp = Matrix::Zero(n, k_count);
  for (Eigen::Index i = 0; i < n; ++i) resp(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  double entropy = 0.0;

  Posterior post;
  auto m_step = [&]() {
    const Vector nk = resp.colwise().sum().transpose().array() + 10.0 * std::numeric_limits<double>::epsilon();
    post.alpha = alpha0 + nk.array();
    post.beta = beta0 + nk.array();
    post.nu = nu0 + nk.array();
    post.means.resize(k_count, d);
    post.scatter.assign(static_cast<std::size_t>(k_count), Matrix());
    for (int k = 0; k < k_count; ++k) {
      const Vector xbar = z.transpose() * resp.col(k) / nk[k];
      const Matrix centered = z.rowwise() - xbar.transpose();
      const Matrix s = centered.transpose() * resp.col(k).asDiagonal() * centered;
      post.means.row(k) = ((beta0 * m0 + nk[k] * xbar) / post.beta[k]).transpose();
      const Vector dm = xbar - m0;
      post.scatter[static_cast<std::size_t>(k)] =
          scatter0 + s + (beta0 * nk[k] / (beta0 + nk[k])) * dm * dm.transpose();
    }
  };

  std::vector<Eigen::LLT<Matrix>> factors(static_cast<std::size_t>(k_count));
  auto factorize = [&]() {
    for (int k = 0; k < k_count; ++k) {
      auto& f = factors[static_cast<std::size_t>(k)];
      f.compute(post.scatter[static_cast<std::size_t>(k)]);
      if (f.info() != Eigen::Success) throw FitError("bgmr: component scatter lost positive definiteness");
    }
  };
  // log|W_k| = -log|W_k^{-1}|
  auto log_det_w = [&](int k) {
    const Matrix& l = factors[static_cast<std::size_t>(k)].matrixLLT();
    return -2.0 * l.diagonal().array().log().sum();
  };

  auto lower_bound = [&]() {
    double wishart = 0.0;
    for (int k = 0; k < k_count; ++k) {
      double lg = 0.0;
      for (Eigen::Index i = 0; i < d; ++i) lg += std::lgamma(0.5 * (post.nu[k] - static_cast<double>(i)));
      wishart += -(post.nu[k] * 0.5 * log_det_w(k) + post.nu[k] * dd * 0.5 * std::log(2.0) + lg);
    }
    double norm_weight = std::lgamma(post.alpha.sum());
    for (int k = 0; k < k_count; ++k) norm_weight -= std::lgamma(post.alpha[k]);
    return entropy - wishart - norm_weight - 0.5 * dd * post.beta.array().log().sum();
  };

  auto e_step = [&]() {
    Matrix log_rho(n, k_count);
    const double digamma_total = boost::math::digamma(post.alpha.sum());
    for (int k = 0; k < k_count; ++k) {
      const Matrix& l = factors[static_cast<std::size_t>(k)].matrixLLT();
      const Matrix whiten = l.triangularView<Eigen::Lower>().solve(Matrix::Identity(d, d));
      const Vector q = QuadraticForms(z, post.means.row(k).transpose(), whiten, options.exec);
      double expected_log_det = dd * std::log(2.0) + log_det_w(k);
      for (Eigen::Index i = 1; i <= d; ++i) {
        expected_log_det += boost::math::digamma(0.5 * (post.nu[k] + 1.0 - static_cast<double>(i)));
      }
      const double expected_log_pi = boost::math::digamma(post.alpha[k]) - digamma_total;
      log_rho.col(k) = (expected_log_pi + 0.5 * expected_log_det - 0.5 * dd * kLog2Pi -
                        0.5 * (dd / post.beta[k] + post.nu[k] * q.array()))
                           .matrix();
    }
    entropy = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double norm = LogSumExp(log_rho.row(i).transpose());
      for (int k = 0; k < k_count; ++k) {
        const double lr = log_rho(i, k) - norm;
        const double r = std::exp(lr);
        resp(i, k) = r;
        if (r > 0.0) entropy -= r * lr;
      }
    }
  };

  struct Run {
    Posterior post;
    Matrix resp;
    double bound = -std::numeric_limits<double>::infinity();
    bool converged = false;
    int iterations = 0;
  };
  // Coordinate ascent from the current responsibilities; keeps the best bound seen.
  auto run = [&]() {
    Run best;
    double previous = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
      m_step();
      factorize();
      const double bound = lower_bound();
      if (!std::isfinite(bound)) throw FitError("bgmr: non-finite lower bound at iteration " + std::to_string(iter));
      best.iterations = iter;
      const bool done = std::abs(bound - previous) <= options.tolerance * std::max(1.0, std::abs(bound));
      if (bound > best.bound || done) {
        best.bound = bound;
        best.post = post;
        best.resp = resp;
      }
      if (done) {
        best.converged = true;
        break;
      }
      previous = bound;
      e_step();
    }
    return best;
  };

  Run state = run();
  int total_iterations = state.iterations;
  // Greedy deletion: move a small component's points to the others and keep the
  // result when the bound improves. Escapes the split optima coordinate ascent
  // settles into on unimodal data.
  for (bool improved = options.greedy_deletion; improved;) {
    improved = false;
    const Vector nk = state.resp.colwise().sum().transpose();
    std::vector<int> active;
    for (int k = 0; k < k_count; ++k) {
      if (nk[k] >= options.prune_weight * static_cast<double>(n)) active.push_back(k);
    }
    if (active.size() < 2) break;
    std::stable_sort(active.begin(), active.end(), [&](int a, int b) { return nk[a] < nk[b]; });
    for (int victim : active) {
      resp = state.resp;
      resp.col(victim).setZero();
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mass = resp.row(i).sum();
        if (mass > 1e-12) {
          resp.row(i) /= mass;
          continue;
        }
        int nearest = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (int k : active) {
          if (k == victim) continue;
          const double dist = (z.row(i) - state.post.means.row(k)).squaredNorm();
          if (dist < best_d) {
            best_d = dist;
            nearest = k;
          }
        }
        resp.row(i).setZero();
        resp(i, nearest) = 1.0;
      }
      entropy = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        for (int k = 0; k < k_count; ++k) {
          if (resp(i, k) > 0.0) entropy -= resp(i, k) * std::log(resp(i, k));
        }
      }
      Run trial = run();
      total_iterations += trial.iterations;
      if (trial.bound > state.bound + 1e-9 * std::max(1.0, std::abs(state.bound))) {
        state = std::move(trial);
        improved = true;
        break;
      }
    }
  }

  BgmrModel model;
  model.input_dim_ = static_cast<int>(X.cols());
  model.output_dim_ = static_cast<int>(Y.cols());
  model.converged_ = state.converged;
  model.iterations_ = total_iterations;
  model.lower_bound_ = state.bound;
  const Posterior& best = state.post;

  const double alpha_total = best.alpha.sum();
  std::vector<BgmrComponent> comps;
  for (int k = 0; k < k_count; ++k) {
    const double weight = best.alpha[k] / alpha_total;
    if (weight < options.prune_weight) continue;
    BgmrComponent c;
    c.weight = weight;
    c.mean = best.means.row(k).transpose();
    c.dof = best.nu[k] + 1.0 - dd;
    c.scale = (1.0 + best.beta[k]) / (best.beta[k] * c.dof) * best.scatter[static_cast<std::size_t>(k)];
    comps.push_back(std::move(c));
  }
  if (comps.empty()) throw FitError("bgmr: every component was pruned");
  double total = 0.0;
  for (const auto& c : comps) total += c.weight;
  for (auto& c : comps) c.weight /= total;
  std::stable_sort(comps.begin(), comps.end(),
                   [](const BgmrComponent& a, const BgmrComponent& b) { return a.weight > b.weight; });
  model.components_ = std::move(comps);
  model.Prepare();
  return model;
}

BgmrModel BgmrModel::FromComponents(std::vector<BgmrComponent> components, int input_dim) {
  if (components.empty()) throw InputError("bgmr: needs at least one component");
  const auto d = components.front().mean.size();
  if (input_dim < 1 || input_dim >= d) throw InputError("bgmr: input dimension out of range");
  double total = 0.0;
  for (const auto& c : components) {
    if (c.mean.size() != d || c.scale.rows() != d || c.scale.cols() != d) {
      throw InputError("bgmr: component shapes disagree");
    }
    if (!(c.weight > 0.0) || !(c.dof > 0.0)) throw InputError("bgmr: weights and dof must be positive");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-10) throw InputError("bgmr: weights must sum to one");
  BgmrModel model;
  model.input_dim_ = input_dim;
  model.output_dim_ = static_cast<int>(d) - input_dim;
  model.components_ = std::move(components);
  model.Prepare();
  return model;
}

void BgmrModel::Prepare() {
  const int dx = input_dim_;
  cache_.clear();
  for (const auto& c : components_) {
    Cache entry;
    entry.xx.compute(c.scale.topLeftCorner(dx, dx));
    if (entry.xx.info() != Eigen::Success) throw FitError("bgmr: input block of a component is not positive definite");
    entry.gain = entry.xx.solve(c.scale.topRightCorner(dx, output_dim_)).transpose();
    const double half_log_det = entry.xx.matrixLLT().diagonal().array().log().sum();
    const double ddx = static_cast<double>(dx);
    entry.log_norm = std::log(c.weight) + std::lgamma(0.5 * (c.dof + ddx)) - std::lgamma(0.5 * c.dof) -
                     0.5 * ddx * std::log(c.dof * M_PI) - half_log_det;
    cache_.push_back(std::move(entry));
  }
}

Vector BgmrModel::Responsibilities(const Eigen::Ref<const Vector>& x) const {
  RequireInput(x);
  const int k_count = components();
  Vector log_p(k_count);
  for (int k = 0; k < k_count; ++k) {
    const auto& c = components_[static_cast<std::size_t>(k)];
    const auto& entry = cache_[static_cast<std::size_t>(k)];
    const Vector diff = x - c.mean.head(input_dim_);
    const double maha = entry.xx.matrixL().solve(diff).squaredNorm();
    log_p[k] = entry.log_norm - 0.5 * (c.dof + input_dim_) * std::log1p(maha / c.dof);
  }
  const double norm = LogSumExp(log_p);
  return (log_p.array() - norm).exp();
}

Vector BgmrModel::ConditionalMean(int k, const Eigen::Ref<const Vector>& x) const {
  RequireInput(x);
  if (k < 0 || k >= components()) throw InputError("bgmr: component index out of range");
  const auto& c = components_[static_cast<std::size_t>(k)];
  return c.mean.tail(output_dim_) + cache_[static_cast<std::size_t>(k)].gain * (x - c.mean.head(input_dim_));
}

std::vector<Prediction> BgmrModel::PredictModes(const Eigen::Ref<const Vector>& x, int top) const {
  if (top < 1) throw InputError("PredictModes: top must be at least 1");
  const Vector r = Responsibilities(x);
  std::vector<int> order(static_cast<std::size_t>(components()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r[a] > r[b]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(top)));
  std::vector<Prediction> out;
  for (int k : order) out.push_back({ConditionalMean(k, x), r[k], kind()});
  return out;
}

Prediction BgmrModel::Predict(const Eigen::Ref<const Vector>& x) const { return PredictModes(x, 1).front(); }

Container BgmrModel::ToContainer() const {
  Container c;
  c.header = {{"kind", kind()},
              {"input_dim", input_dim_},
              {"output_dim", output_dim_},
              {"components", components()},
              {"converged", converged_},
              {"iterations", iterations_},
              {"lower_bound", lower_bound_}};
  Matrix weights(1, components());
  Matrix dofs(1, components());
  for (int k = 0; k < components(); ++k) {
    weights(0, k) = components_[static_cast<std::size_t>(k)].weight;
    dofs(0, k) = components_[static_cast<std::size_t>(k)].dof;
  }
  c.Add("weights", weights);
  c.Add("dof", dofs);
  for (int k = 0; k < components(); ++k) {
    c.Add("mean_" + std::to_string(k), components_[static_cast<std::size_t>(k)].mean.transpose());
    c.Add("scale_" + std::to_string(k), components_[static_cast<std::size_t>(k)].scale);
  }
  return c;
}

BgmrModel BgmrModel::FromContainer(const Container& c) {
  BgmrModel model;
  model.input_dim_ = c.header.at("input_dim").get<int>();
  model.output_dim_ = c.header.at("output_dim").get<int>();
  model.converged_ = c.header.at("converged").get<bool>();
  model.iterations_ = c.header.at("iterations").get<int>();
  model.lower_bound_ = c.header.at("lower_bound").get<double>();
  const int k_count = c.header.at("components").get<int>();
  const Matrix& weights = c.Get("weights");
  const Matrix& dofs = c.Get("dof");
  if (k_count < 1 || weights.cols() != k_count || dofs.cols() != k_count) {
    throw ConfigError("bgmr container: inconsistent component count");
  }
  const int d = model.input_dim_ + model.output_dim_;
  for (int k = 0; k < k_count; ++k) {
    BgmrComponent comp;
    comp.weight = weights(0, k);
    comp.dof = dofs(0, k);
    comp.mean = c.Get("mean_" + std::to_string(k)).row(0).transpose();
    comp.scale = c.Get("scale_" + std::to_string(k));
    if (comp.mean.size() != d || comp.scale.rows() != d || comp.scale.cols() != d) {
      throw ConfigError("bgmr container: component shape mismatch");
    }
    model.components_.push_back(std::move(comp));
  }
  model.Prepare();
  return model;
}

}  // namespace memmo
