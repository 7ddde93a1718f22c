#pragma once

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include <unistd.h>

#include <doctest.h>

#include "memmo/common.hpp"
#include "memmo/geometry.hpp"

namespace memmo::testing {

inline constexpr double kPi = 3.14159265358979323846;

/// Two-link unit arm without obstacles and with full-turn joint limits.
inline EnvironmentPtr TwoLinkArm() {
  return std::make_shared<const Environment>(
      Environment::Arm("two-link", {1.0, 1.0}, {}, {{-kPi, kPi}, {-kPi, kPi}}, 0.0));
}

/// Mobile base with one box between the start and goal regions.
inline EnvironmentPtr BoxScene() {
  return std::make_shared<const Environment>(Environment::Base2d(
      "box", {Box{Vector2(-1.2, -0.1), Vector2(1.2, 0.1)}}, 0.15, {{-3, 3}, {-3, 3}, {-kPi, kPi}}));
}

inline EnvironmentPtr EmptyBase() {
  return std::make_shared<const Environment>(
      Environment::Base2d("empty", {}, 0.15, {{-3, 3}, {-3, 3}, {-kPi, kPi}}));
}

inline Matrix RandomMatrix(int rows, int cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

inline double MaxAbs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("memmo-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace memmo::testing
