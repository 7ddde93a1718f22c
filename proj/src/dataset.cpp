#include <algorithm>

#include "memmo/approximators.hpp"

namespace memmo {

void Dataset::Validate() const {
  if (X.rows() < 1) throw InputError("Dataset: needs at least one row");
  if (X.rows() != Y.rows()) throw InputError("Dataset: X and Y row counts differ");
  RequireFinite(X, "Dataset X");
  RequireFinite(Y, "Dataset Y");
}

Dataset Dataset::Head(int n) const {
  if (n < 1 || n > size()) throw InputError("Dataset::Head: row count out of range");
  Dataset out = *this;
  out.X = X.topRows(n);
  out.Y = Y.topRows(n);
  return out;
}

Container DatasetToContainer(const Dataset& data) {
  Container c;
  c.header = {{"kind", "dataset"},
              {"dof", data.dof},
              {"steps", data.steps},
              {"env_id", data.env_id},
              {"pca_coded", data.pca_coded}};
  c.Add("X", data.X);
  c.Add("Y", data.Y);
  return c;
}

Dataset DatasetFromContainer(const Container& c) {
  if (c.header.value("kind", "") != "dataset") throw ConfigError("container does not hold a dataset");
  Dataset data;
  data.X = c.Get("X");
  data.Y = c.Get("Y");
  data.dof = c.header.at("dof").get<int>();
  data.steps = c.header.at("steps").get<int>();
  data.env_id = c.header.at("env_id").get<std::string>();
  data.pca_coded = c.header.at("pca_coded").get<bool>();
  data.Validate();
  return data;
}

std::vector<Prediction> Regressor::PredictModes(const Eigen::Ref<const Vector>& x, int top) const {
  if (top < 1) throw InputError("PredictModes: top must be at least 1");
  return {Predict(x)};
}

void Regressor::RequireInput(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != input_dim()) {
    throw InputError(kind() + ": query has dimension " + std::to_string(x.size()) + ", model expects " +
                     std::to_string(input_dim()));
  }
}

RegressorPtr RegressorFromContainer(const Container& c) {
  const std::string kind = c.header.value("kind", "");
  if (kind == "knn") return std::make_shared<const KnnModel>(KnnModel::FromContainer(c));
  if (kind == "gpr") return std::make_shared<const GprModel>(GprModel::FromContainer(c));
  if (kind == "bgmr") return std::make_shared<const BgmrModel>(BgmrModel::FromContainer(c));
  throw ConfigError("unknown model kind '" + kind + "'");
}

}  // namespace memmo
