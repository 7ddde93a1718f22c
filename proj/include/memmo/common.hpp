#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace memmo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Vector2 = Eigen::Vector2d;

/// A robot configuration q in R^D.
using Configuration = Eigen::VectorXd;

/// Seeded random source passed explicitly to every stochastic operation.
using Rng = std::mt19937_64;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments: dimension mismatch, out-of-range hyperparameters, unknown names.
class InputError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when goal selection cannot produce any candidate (e.g. every IK attempt failed).
class MetricError : public Error {
 public:
  using Error::Error;
};

/// Derives an independent stream for item `index` of a run seeded with `seed`.
/// Streams do not depend on how many items are drawn, so batch results are
/// reproducible regardless of batch size or thread count.
inline Rng DeriveRng(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over (seed, index)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z = z ^ (z >> 31);
  std::seed_seq seq{static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z >> 32),
                    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(index)};
  return Rng(seq);
}

inline void RequireFinite(const Eigen::Ref<const Matrix>& m, const std::string& what) {
  if (!m.allFinite()) throw InputError(what + ": non-finite entries");
}

}  // namespace memmo
