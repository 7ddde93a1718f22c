#pragma once

#include "memmo/common.hpp"

namespace memmo {

/// Execution policy for the data-parallel kernels. Both policies evaluate every
/// output entry with the same arithmetic, so results are bitwise identical; the
/// serial path is the reference used by the tests.
enum class Exec { kSerial, kParallel };

/// Policy used by library call sites: kParallel when built with OpenMP.
Exec DefaultExec();

/// out(i, j) = ||a.row(i) - b.row(j)||^2, accumulated coordinate by coordinate.
Matrix SquaredDistances(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
                        Exec exec = DefaultExec());

/// out(i, j) = signal_variance * exp(-||a_i - b_j||^2 / (2 length_scale^2)).
Matrix RbfGram(const Eigen::Ref<const Matrix>& a, const Eigen::Ref<const Matrix>& b,
               double length_scale, double signal_variance, Exec exec = DefaultExec());

/// out(i) = ||lower * (z.row(i) - center)||^2 for a lower-triangular factor,
/// i.e. the Mahalanobis form (z - c)^T L^T L (z - c).
Vector QuadraticForms(const Eigen::Ref<const Matrix>& z, const Eigen::Ref<const Vector>& center,
                      const Eigen::Ref<const Matrix>& lower, Exec exec = DefaultExec());

}  // namespace memmo
