#include <algorithm>
#include <array>
#include <cmath>

#include "memmo/approximators.hpp"

namespace memmo {

void GprHyper::Validate() const {
  if (!(length_scale > 0.0) || !std::isfinite(length_scale)) throw InputError("gpr: length scale must be positive");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw InputError("gpr: signal variance must be positive");
  }
  if (!(noise_variance >= 1e-8) || !std::isfinite(noise_variance)) {
    throw InputError("gpr: noise variance must be at least 1e-8");
  }
}

GprHyper GprHyper::Defaults(const Matrix& X, const Matrix& Y) {
  GprHyper h;
  if (X.rows() >= 2) {
    const Matrix d2 = SquaredDistances(X, X);
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(X.rows() * (X.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      for (Eigen::Index j = i + 1; j < X.rows(); ++j) dist.push_back(std::sqrt(d2(i, j)));
    }
    const auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
    std::nth_element(dist.begin(), mid, dist.end());
    double median = *mid;
    if (dist.size() % 2 == 0) median = 0.5 * (median + *std::max_element(dist.begin(), mid));
    if (median > 0.0) h.length_scale = median;
  }
  if (Y.rows() >= 1 && Y.cols() >= 1) {
    const Eigen::RowVectorXd mean = Y.colwise().mean();
    const double var = (Y.rowwise() - mean).array().square().mean();
    if (var > 0.0) h.signal_variance = var;
  }
  return h;
}

double RbfKernel(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b, const GprHyper& hyper) {
  if (a.size() != b.size()) throw InputError("RbfKernel: dimension mismatch");
  hyper.Validate();
  return hyper.signal_variance *
         std::exp(-(a - b).squaredNorm() / (2.0 * hyper.length_scale * hyper.length_scale));
}

GprModel GprModel::Fit(const Matrix& X, const Matrix& Y, const GprHyper& hyper) {
  hyper.Validate();
  if (X.rows() < 1 || X.rows() != Y.rows()) throw InputError("gpr: X and Y must have equal, positive row counts");
  RequireFinite(X, "gpr X");
  RequireFinite(Y, "gpr Y");
  const Matrix gram = RbfGram(X, X, hyper.length_scale, hyper.signal_variance);
  constexpr std::array<double, 6> kJitter = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
  for (double jitter : kJitter) {
    Matrix a = gram;
    a.diagonal().array() += hyper.noise_variance + jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) continue;
    const Matrix factor = llt.matrixL();
    if (!factor.allFinite() || (factor.diagonal().array() <= 0.0).any()) continue;
    GprModel model;
    model.hyper_ = hyper;
    model.jitter_ = jitter;
    model.x_ = X;
    model.factor_ = factor;
    model.alpha_ = llt.solve(Y);
    return model;
  }
  throw FitError("gpr: kernel matrix is not positive definite even with 1e-6 jitter");
}

Prediction GprModel::Predict(const Eigen::Ref<const Vector>& x) const {
  RequireInput(x);
  const Matrix k = RbfGram(x.transpose(), x_, hyper_.length_scale, hyper_.signal_variance);
  return {(k * alpha_).transpose(), 1.0, kind()};
}

double GprModel::PosteriorVariance(const Eigen::Ref<const Vector>& x) const {
  RequireInput(x);
  const Vector k = RbfGram(x_, x.transpose(), hyper_.length_scale, hyper_.signal_variance).col(0);
  const Vector v = factor_.triangularView<Eigen::Lower>().solve(k);
  return std::max(hyper_.signal_variance - v.squaredNorm(), 0.0);
}

Container GprModel::ToContainer() const {
  Container c;
  c.header = {{"kind", kind()},
              {"length_scale", hyper_.length_scale},
              {"signal_variance", hyper_.signal_variance},
              {"noise_variance", hyper_.noise_variance},
              {"jitter", jitter_}};
  c.Add("X", x_);
  c.Add("factor", factor_);
  c.Add("alpha", alpha_);
  return c;
}

GprModel GprModel::FromContainer(const Container& c) {
  GprModel model;
  model.hyper_.length_scale = c.header.at("length_scale").get<double>();
  model.hyper_.signal_variance = c.header.at("signal_variance").get<double>();
  model.hyper_.noise_variance = c.header.at("noise_variance").get<double>();
  model.hyper_.Validate();
  model.jitter_ = c.header.at("jitter").get<double>();
  model.x_ = c.Get("X");
  model.factor_ = c.Get("factor");
  model.alpha_ = c.Get("alpha");
  const auto n = model.x_.rows();
  if (model.factor_.rows() != n || model.factor_.cols() != n || model.alpha_.rows() != n) {
    throw ConfigError("gpr container: inconsistent shapes");
  }
  return model;
}

}  // namespace memmo
