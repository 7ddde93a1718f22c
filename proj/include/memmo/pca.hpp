#pragma once

#include "memmo/common.hpp"
#include "memmo/container.hpp"

namespace memmo {

/// Linear projection onto the leading principal directions of a set of rows.
class PcaProjection {
 public:
  /// Centres Y and keeps the top `components` right singular vectors, each
  /// signed so that its largest-magnitude entry is positive.
  static PcaProjection Fit(const Matrix& Y, int components);
  /// min(50, N - 1, d_y), at least 1.
  static int DefaultComponents(int rows, int dims);

  int components() const { return static_cast<int>(basis_.rows()); }
  int input_dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  /// components x d_y, orthonormal rows.
  const Matrix& basis() const { return basis_; }
  /// Variance of the training rows along each component, non-increasing.
  const Vector& explained_variance() const { return explained_variance_; }

  Vector Encode(const Eigen::Ref<const Vector>& y) const;
  Vector Decode(const Eigen::Ref<const Vector>& code) const;
  /// Row-wise Encode / Decode.
  Matrix EncodeRows(const Matrix& Y) const;
  Matrix DecodeRows(const Matrix& codes) const;
  /// Mean squared reconstruction error per entry over the rows of Y.
  double ReconstructionMse(const Matrix& Y) const;

  Container ToContainer() const;
  static PcaProjection FromContainer(const Container& c);

 private:
  Vector mean_;
  Matrix basis_;
  Vector explained_variance_;
};

}  // namespace memmo
