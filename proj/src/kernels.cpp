#include "memmo/kernels.hpp"

#include <cmath>

namespace memmo {

namespace {

double RowDistance2(const Eigen::Ref<const Matrix>& a, Eigen::Index i,
                    const Eigen::Ref<const Matrix>& b, Eigen::Index j) {
  double acc = 0.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    const double d = a(i, k) - b(j, k);
    acc += d * d;
  }
  return acc;
}

void RequireSameCols(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                     const char* what) {
  if (a.cols() != b.cols()) throw InputError(std::string(what) + ": column counts differ");
}

}  // namespace

Exec DefaultExec() {
#ifdef MEMMO_HAVE_OPENMP
  return Exec::kParallel;
#else
  return Exec::kSerial;
#endif
}

Matrix SquaredDistances(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                        Exec exec) {
  RequireSameCols(a, b, "SquaredDistances");
  Matrix out(a.rows(), b.rows());
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  if (exec == Exec::kSerial) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) out(i, j) = RowDistance2(a, i, b, j);
    }
    return out;
  }
#pragma omp parallel for schedule(static) if (n * m > 4096)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = RowDistance2(a, i, b, j);
  }
  return out;
}

Matrix RbfGram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
               double length_scale, double signal_variance, Exec exec) {
  RequireSameCols(a, b, "RbfGram");
  if (!(length_scale > 0.0)) throw InputError("RbfGram: length scale must be positive");
  const double inv = 1.0 / (2.0 * length_scale * length_scale);
  Matrix out(a.rows(), b.rows());
  const Eigen::Index n = a.rows();
  const Eigen::Index m = b.rows();
  if (exec == Exec::kSerial) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        out(i, j) = signal_variance * std::exp(-RowDistance2(a, i, b, j) * inv);
      }
    }
    return out;
  }
#pragma omp parallel for schedule(static) if (n * m > 4096)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out(i, j) = signal_variance * std::exp(-RowDistance2(a, i, b, j) * inv);
    }
  }
  return out;
}

Vector QuadraticForms(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Vector>& center,
                      const Eigen::Ref<const Matrix>& lower, Exec exec) {
  const Eigen::Index d = z.cols();
  if (center.size() != d || lower.rows() != d || lower.cols() != d) {
    throw InputError("QuadraticForms: dimension mismatch");
  }
  const Eigen::Index n = z.rows();
  Vector out(n);
  auto form = [&](Eigen::Index i) {
    const Vector diff = z.row(i).transpose() - center;
    double acc = 0.0;
    for (Eigen::Index r = 0; r < d; ++r) {
      double s = 0.0;
      for (Eigen::Index c = 0; c <= r; ++c) s += lower(r, c) * diff[c];
      acc += s * s;
    }
    return acc;
  };
  if (exec == Exec::kSerial) {
    for (Eigen::Index i = 0; i < n; ++i) out[i] = form(i);
    return out;
  }
#pragma omp parallel for schedule(static) if (n * d * d > 65536)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = form(i);
  return out;
}

}  // namespace memmo
