#include "memmo/path.hpp"

namespace memmo {

Path::Path(int dof, int steps) {
  if (dof < 1) throw InputError("Path: dof must be at least 1");
  if (steps < 1) throw InputError("Path: steps must be at least 1");
  configs_ = Matrix::Zero(dof, steps + 1);
}

Path Path::FromFlat(const Eigen::Ref<const Vector>& flat, int dof, int steps) {
  Path p(dof, steps);
  if (flat.size() != p.size()) {
    throw InputError("Path::FromFlat: expected " + std::to_string(p.size()) + " values, got " +
                     std::to_string(flat.size()));
  }
  p.configs_ = Eigen::Map<const Matrix>(flat.data(), dof, steps + 1);
  return p;
}

Vector Path::Flatten() const { return Eigen::Map<const Vector>(configs_.data(), configs_.size()); }

}  // namespace memmo
