#pragma once

#include "memmo/common.hpp"

namespace memmo {

/// A configuration sequence q_0..q_T. Storage is a D x (T+1) column-major
/// matrix, so the raw buffer is the time-major flattening (q_0, q_1, ...).
class Path {
 public:
  Path() = default;
  Path(int dof, int steps);

  /// Reshapes a time-major flat vector of length dof * (steps + 1).
  static Path FromFlat(const Eigen::Ref<const Vector>& flat, int dof, int steps);

  int dof() const { return static_cast<int>(configs_.rows()); }
  /// Number of steps T; there are T+1 configurations.
  int steps() const { return static_cast<int>(configs_.cols()) - 1; }
  int size() const { return static_cast<int>(configs_.size()); }

  auto at(int t) { return configs_.col(t); }
  auto at(int t) const { return configs_.col(t); }
  auto front() const { return configs_.col(0); }
  auto back() const { return configs_.col(configs_.cols() - 1); }

  const Matrix& matrix() const { return configs_; }
  Matrix& matrix() { return configs_; }

  Vector Flatten() const;

  bool operator==(const Path& other) const { return configs_ == other.configs_; }

 private:
  Matrix configs_;
};

}  // namespace memmo
