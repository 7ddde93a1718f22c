#include "memmo/pca.hpp"

#include <algorithm>

#include <Eigen/SVD>

namespace memmo {

int PcaProjection::DefaultComponents(int rows, int dims) { return std::max(1, std::min({50, rows - 1, dims})); }

PcaProjection PcaProjection::Fit(const Matrix& Y, int components) {
  if (Y.rows() < 2) throw InputError("pca: needs at least two rows");
  RequireFinite(Y, "pca input");
  if (components < 1 || components > std::min(Y.rows(), Y.cols())) {
    throw InputError("pca: component count " + std::to_string(components) + " outside [1, min(N, d_y)]");
  }
  PcaProjection p;
  p.mean_ = Y.colwise().mean();
  const Matrix centered = Y.rowwise() - p.mean_.transpose();
  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  p.basis_ = svd.matrixV().leftCols(components).transpose();
  for (int k = 0; k < components; ++k) {
    Eigen::Index arg = 0;
    p.basis_.row(k).cwiseAbs().maxCoeff(&arg);
    if (p.basis_(k, arg) < 0.0) p.basis_.row(k) *= -1.0;
  }
  const Vector s = svd.singularValues().head(components);
  p.explained_variance_ = s.array().square() / static_cast<double>(Y.rows() - 1);
  return p;
}

Vector PcaProjection::Encode(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != input_dim()) throw InputError("pca encode: dimension mismatch");
  return basis_ * (y - mean_);
}

Vector PcaProjection::Decode(const Eigen::Ref<const Vector>& code) const {
  if (code.size() != components()) throw InputError("pca decode: dimension mismatch");
  return mean_ + basis_.transpose() * code;
}

Matrix PcaProjection::EncodeRows(const Matrix& Y) const {
  if (Y.cols() != input_dim()) throw InputError("pca encode: dimension mismatch");
  return (Y.rowwise() - mean_.transpose()) * basis_.transpose();
}

Matrix PcaProjection::DecodeRows(const Matrix& codes) const {
  if (codes.cols() != components()) throw InputError("pca decode: dimension mismatch");
  return (codes * basis_).rowwise() + mean_.transpose();
}

double PcaProjection::ReconstructionMse(const Matrix& Y) const {
  const Matrix diff = DecodeRows(EncodeRows(Y)) - Y;
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

Container PcaProjection::ToContainer() const {
  Container c;
  c.header = {{"kind", "pca"}, {"components", components()}, {"input_dim", input_dim()}};
  c.Add("mean", mean_.transpose());
  c.Add("basis", basis_);
  c.Add("explained_variance", explained_variance_.transpose());
  return c;
}

PcaProjection PcaProjection::FromContainer(const Container& c) {
  if (c.header.value("kind", "") != "pca") throw ConfigError("container does not hold a PCA projection");
  PcaProjection p;
  p.mean_ = c.Get("mean").row(0).transpose();
  p.basis_ = c.Get("basis");
  p.explained_variance_ = c.Get("explained_variance").row(0).transpose();
  if (p.basis_.cols() != p.mean_.size() || p.explained_variance_.size() != p.basis_.rows()) {
    throw ConfigError("pca container: inconsistent shapes");
  }
  return p;
}

}  // namespace memmo
