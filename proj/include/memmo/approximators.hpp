#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "memmo/common.hpp"
#include "memmo/container.hpp"
#include "memmo/kernels.hpp"

namespace memmo {

/// Paired tasks X (N x d_x) and outputs Y (N x d_y): flattened paths, or PCA
/// codes when `pca_coded` is set.
struct Dataset {
  Matrix X;
  Matrix Y;
  int dof = 0;
  int steps = 0;
  std::string env_id;
  bool pca_coded = false;

  int size() const { return static_cast<int>(X.rows()); }
  void Validate() const;
  /// First `n` rows, keeping the metadata.
  Dataset Head(int n) const;
};

Container DatasetToContainer(const Dataset& data);
Dataset DatasetFromContainer(const Container& c);

struct Prediction {
  Vector y;
  /// Responsibility of the component that produced `y`; 1 for single-mode regressors.
  double mode_probability = 1.0;
  std::string source;
};

/// A fitted task -> output map. Immutable after fitting; Predict is thread-safe.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual std::string kind() const = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;
  virtual Prediction Predict(const Eigen::Ref<const Vector>& x) const = 0;
  /// Up to `top` alternative predictions, most probable first.
  virtual std::vector<Prediction> PredictModes(const Eigen::Ref<const Vector>& x, int top) const;
  virtual Container ToContainer() const = 0;

 protected:
  void RequireInput(const Eigen::Ref<const Vector>& x) const;
};

using RegressorPtr = std::shared_ptr<const Regressor>;

/// Rebuilds any regressor written by ToContainer (dispatch on header "kind").
RegressorPtr RegressorFromContainer(const Container& c);

// ---------------------------------------------------------------------------
// k-nearest neighbours

struct KnnOptions {
  int k = 1;
  /// Scale each input column to unit variance before measuring distances.
  bool standardize = false;
};

class KnnModel final : public Regressor {
 public:
  static KnnModel Fit(const Matrix& X, const Matrix& Y, const KnnOptions& options = {});

  std::string kind() const override { return "knn"; }
  int input_dim() const override { return static_cast<int>(x_.cols()); }
  int output_dim() const override { return static_cast<int>(y_.cols()); }
  Prediction Predict(const Eigen::Ref<const Vector>& x) const override;
  Container ToContainer() const override;
  static KnnModel FromContainer(const Container& c);

  /// Row indices of the k nearest training inputs, nearest first, ties to the lower index.
  std::vector<int> Neighbors(const Eigen::Ref<const Vector>& x, Exec exec = DefaultExec()) const;
  const KnnOptions& options() const { return options_; }

 private:
  KnnModel() = default;
  Vector Scaled(const Eigen::Ref<const Vector>& x) const;

  KnnOptions options_;
  Matrix x_;
  Matrix y_;
  Vector scale_;
  Matrix scaled_x_;
};

// ---------------------------------------------------------------------------
// Gaussian process regression

struct GprHyper {
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;

  void Validate() const;
  /// Median pairwise input distance, mean per-column output variance, noise 1e-6.
  static GprHyper Defaults(const Matrix& X, const Matrix& Y);
};

double RbfKernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b,
                 const GprHyper& hyper);

class GprModel final : public Regressor {
 public:
  static GprModel Fit(const Matrix& X, const Matrix& Y, const GprHyper& hyper);

  std::string kind() const override { return "gpr"; }
  int input_dim() const override { return static_cast<int>(x_.cols()); }
  int output_dim() const override { return static_cast<int>(alpha_.cols()); }
  /// Posterior mean k(x, X) (K + s I)^{-1} Y with a zero prior mean.
  Prediction Predict(const Eigen::Ref<const Vector>& x) const override;
  /// Posterior variance of the latent function at x (shared by all outputs).
  double PosteriorVariance(const Eigen::Ref<const Vector>& x) const;
  Container ToContainer() const override;
  static GprModel FromContainer(const Container& c);

  const GprHyper& hyper() const { return hyper_; }
  /// Extra diagonal added beyond the noise variance so the factorization succeeded.
  double jitter() const { return jitter_; }
  /// Lower Cholesky factor of K(X, X) + (noise + jitter) I.
  const Matrix& factor() const { return factor_; }

 private:
  GprModel() = default;

  GprHyper hyper_;
  double jitter_ = 0.0;
  Matrix x_;
  Matrix factor_;
  Matrix alpha_;
};

// ---------------------------------------------------------------------------
// Bayesian Gaussian mixture regression

struct BgmrOptions {
  int max_components = 10;
  /// Dirichlet concentration per component; <= 0 selects 1 / max_components.
  double weight_concentration = 0.0;
  double mean_precision = 1.0;
  /// Wishart degrees of freedom beyond the joint dimension (nu0 = d + extra_dof).
  double extra_dof = 2.0;
  /// Prior scatter is prior_scale * diag(data variance) + variance_floor.
  double prior_scale = 0.1;
  double variance_floor = 1e-6;
  int max_iterations = 500;
  double tolerance = 1e-6;
  /// Components whose expected weight falls below this are dropped after fitting.
  double prune_weight = 1e-3;
  /// After convergence, try deleting each small component and keep the refit when
  /// the lower bound improves.
  bool greedy_deletion = true;
  std::uint64_t seed = 0;
  Exec exec = DefaultExec();
};

/// One component of the joint predictive: a Student-t over z = (x, y).
struct BgmrComponent {
  double weight = 0.0;
  Vector mean;
  Matrix scale;
  double dof = 0.0;
};

class BgmrModel final : public Regressor {
 public:
  /// Variational Bayes mixture on joint rows (x_i, y_i).
  static BgmrModel Fit(const Matrix& X, const Matrix& Y, const BgmrOptions& options = {});
  /// Builds a model directly from joint predictive components.
  static BgmrModel FromComponents(std::vector<BgmrComponent> components, int input_dim);

  std::string kind() const override { return "bgmr"; }
  int input_dim() const override { return input_dim_; }
  int output_dim() const override { return output_dim_; }
  /// Conditional mean of the component with the largest responsibility.
  Prediction Predict(const Eigen::Ref<const Vector>& x) const override;
  /// Conditional means of the min(top, K) most responsible components.
  std::vector<Prediction> PredictModes(const Eigen::Ref<const Vector>& x, int top) const override;
  /// p(k | x) from the x-marginals; sums to one.
  Vector Responsibilities(const Eigen::Ref<const Vector>& x) const;
  /// Conditional mean of component k at x.
  Vector ConditionalMean(int k, const Eigen::Ref<const Vector>& x) const;
  Container ToContainer() const override;
  static BgmrModel FromContainer(const Container& c);

  int components() const { return static_cast<int>(components_.size()); }
  const BgmrComponent& component(int k) const { return components_[static_cast<std::size_t>(k)]; }
  bool converged() const { return converged_; }
  int iterations() const { return iterations_; }
  double lower_bound() const { return lower_bound_; }

 private:
  BgmrModel() = default;
  void Prepare();

  struct Cache {
    Eigen::LLT<Matrix> xx;
    Matrix gain;  // scale_yx * scale_xx^{-1}
    double log_norm = 0.0;
  };

  int input_dim_ = 0;
  int output_dim_ = 0;
  std::vector<BgmrComponent> components_;
  std::vector<Cache> cache_;
  bool converged_ = true;
  int iterations_ = 0;
  double lower_bound_ = 0.0;
};

}  // namespace memmo
