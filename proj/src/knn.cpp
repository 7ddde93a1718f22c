#include <algorithm>
#include <numeric>

#include "memmo/approximators.hpp"

namespace memmo {

KnnModel KnnModel::Fit(const Matrix& X, const Matrix& Y, const KnnOptions& options) {
  if (X.rows() < 1 || X.rows() != Y.rows()) throw InputError("knn: X and Y must have equal, positive row counts");
  if (options.k < 1 || options.k > X.rows()) throw InputError("knn: k must lie in [1, N]");
  RequireFinite(X, "knn X");
  RequireFinite(Y, "knn Y");
  KnnModel model;
  model.options_ = options;
  model.x_ = X;
  model.y_ = Y;
  model.scale_ = Vector::Ones(X.cols());
  if (options.standardize) {
    const Vector mean = X.colwise().mean();
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double sd = std::sqrt((X.col(j).array() - mean[j]).square().mean());
      model.scale_[j] = sd > 0.0 ? 1.0 / sd : 1.0;
    }
  }
  model.scaled_x_ = X * model.scale_.asDiagonal();
  return model;
}

Vector KnnModel::Scaled(const Eigen::Ref<const Vector>& x) const { return x.cwiseProduct(scale_); }

std::vector<int> KnnModel::Neighbors(const Eigen::Ref<const Vector>& x, Exec exec) const {
  RequireInput(x);
  const Matrix query = Scaled(x).transpose();
  const Matrix dist = SquaredDistances(query, scaled_x_, exec);
  std::vector<int> order(static_cast<std::size_t>(x_.rows()));
  std::iota(order.begin(), order.end(), 0);
  const auto k = static_cast<std::size_t>(options_.k);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](int a, int b) { return dist(0, a) < dist(0, b) || (dist(0, a) == dist(0, b) && a < b); });
  order.resize(k);
  return order;
}

Prediction KnnModel::Predict(const Eigen::Ref<const Vector>& x) const {
  const auto rows = Neighbors(x);
  Vector y = Vector::Zero(y_.cols());
  for (int r : rows) y += y_.row(r).transpose();
  if (rows.size() > 1) y /= static_cast<double>(rows.size());
  return {std::move(y), 1.0, kind()};
}

Container KnnModel::ToContainer() const {
  Container c;
  c.header = {{"kind", kind()}, {"k", options_.k}, {"standardize", options_.standardize}};
  c.Add("X", x_);
  c.Add("Y", y_);
  c.Add("scale", scale_.transpose());
  return c;
}

KnnModel KnnModel::FromContainer(const Container& c) {
  KnnModel model;
  model.options_.k = c.header.at("k").get<int>();
  model.options_.standardize = c.header.at("standardize").get<bool>();
  model.x_ = c.Get("X");
  model.y_ = c.Get("Y");
  model.scale_ = c.Get("scale").row(0).transpose();
  if (model.x_.rows() != model.y_.rows() || model.scale_.size() != model.x_.cols() ||
      model.options_.k < 1 || model.options_.k > model.x_.rows()) {
    throw ConfigError("knn container: inconsistent shapes");
  }
  model.scaled_x_ = model.x_ * model.scale_.asDiagonal();
  return model;
}

}  // namespace memmo
