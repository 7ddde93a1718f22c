#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memmo/approximators.hpp"
#include "memmo/geometry.hpp"
#include "memmo/pca.hpp"
#include "memmo/task.hpp"
#include "memmo/trajopt.hpp"

namespace memmo {

/// Method names accepted by a memory: knn, gpr, bgmr, optionally suffixed with
/// "_pca" to train on PCA codes of the paths.
bool IsKnownMethod(const std::string& name);
bool UsesPca(const std::string& method);

/// GPR hyperparameters of a memory; unset entries take GprHyper::Defaults on each training set.
struct GprConfig {
  std::optional<double> length_scale;
  std::optional<double> signal_variance;
  double noise_variance = 1e-6;

  GprHyper Resolve(const Matrix& X, const Matrix& Y) const;
};

struct MemoryConfig {
  std::vector<std::string> methods = {"knn", "gpr", "bgmr"};
  int steps = 30;
  /// 0 selects PcaProjection::DefaultComponents.
  int pca_components = 0;
  KnnOptions knn;
  GprConfig gpr;
  /// Path datasets have about as many samples as joint dimensions, where the bound
  /// favours a single component; memories therefore keep every component VB leaves.
  BgmrOptions bgmr = [] {
    BgmrOptions o;
    o.greedy_deletion = false;
    return o;
  }();
  SolverOptions solver;
  /// Build attempts stop after this many multiples of the requested size.
  int retry_factor = 10;

  void Validate() const;
};

nlohmann::json MemoryConfigToJson(const MemoryConfig& config);
MemoryConfig MemoryConfigFromJson(const nlohmann::json& doc);

struct BuildInfo {
  std::uint64_t seed = 0;
  int requested = 0;
  int attempts = 0;
  int accepted = 0;
  bool complete = true;
  double wall_time = 0.0;
  /// Largest max-norm PCA reconstruction residual over the stored paths (0 without PCA).
  double pca_bound = 0.0;

  double acceptance_rate() const { return attempts > 0 ? static_cast<double>(accepted) / attempts : 0.0; }
};

/// The optimization problem for `task`: configuration goal, or tip goal for the Cartesian family.
Problem ProblemForTask(const EnvironmentPtr& env, const Task& task, int steps);

/// The straight-line initial guess used when building and as the STD baseline:
/// via the task spec's waypoint choice, or for Cartesian tasks towards one IK solution
/// (staying at q_init when IK finds none).
Path StraightLineGuess(const Environment& env, const TaskSpec& spec, const Task& task, int steps, Rng& rng);

/// Outcome of one build attempt, kept for auditing.
struct BuildSample {
  Task task;
  SolveResult result;
};

/// Solved (task, path) pairs plus the regressors trained on them. Immutable once built.
class Memory {
 public:
  /// Samples, solves and keeps valid pairs until `size` are stored or the retry
  /// ceiling is hit, then trains every configured method. Attempt i draws from
  /// DeriveRng(seed, i), so smaller builds are prefixes of larger ones.
  static Memory Build(EnvironmentPtr env, TaskSpec spec, int size, MemoryConfig config, std::uint64_t seed,
                      std::vector<BuildSample>* samples = nullptr);
  /// Trains on an existing dataset (e.g. a prefix of a larger build).
  static Memory Train(EnvironmentPtr env, TaskSpec spec, Dataset data, MemoryConfig config, BuildInfo info);

  void Save(const std::filesystem::path& dir) const;
  static Memory Load(const std::filesystem::path& dir);

  /// Prediction for `method`, decoded through PCA when needed, reshaped to a path
  /// and snapped to the task's endpoints.
  Path PredictWarmStart(const std::string& method, const Task& task) const;
  /// Up to `top` alternative warm starts (one per mixture component for bgmr).
  std::vector<Path> PredictWarmStarts(const std::string& method, const Task& task, int top) const;

  const Environment& env() const { return *env_; }
  const EnvironmentPtr& env_ptr() const { return env_; }
  const TaskSpec& spec() const { return spec_; }
  const MemoryConfig& config() const { return config_; }
  const Dataset& dataset() const { return data_; }
  const BuildInfo& info() const { return info_; }
  const std::optional<PcaProjection>& pca() const { return pca_; }
  bool HasMethod(const std::string& method) const { return models_.count(method) > 0; }
  const Regressor& model(const std::string& method) const;
  std::vector<std::string> methods() const;
  int steps() const { return config_.steps; }

  nlohmann::json Provenance() const;

 private:
  Memory() = default;
  Path ToPath(const Vector& output, bool coded, const Task& task) const;

  EnvironmentPtr env_;
  TaskSpec spec_;
  MemoryConfig config_;
  Dataset data_;
  std::optional<PcaProjection> pca_;
  std::map<std::string, RegressorPtr> models_;
  BuildInfo info_;
};

/// Expands a Cartesian task into fixed-init configuration goals: up to `count`
/// distinct collision-free IK solutions. Throws MetricError when there are none.
std::vector<Task> ExpandCartesianGoal(const Environment& env, const Task& task, int count, Rng& rng);

struct MetricChoice {
  int index = 0;
  Task task;
  Path warm_start;
  SolveResult result;
  /// Path cost of every candidate's warm start, in goal order.
  std::vector<double> warm_costs;
  double prediction_time = 0.0;
};

/// Ranks goals by the path cost of their predicted warm starts and returns the
/// cheapest (ties to the lowest index) without solving.
MetricChoice ChooseGoalByMetric(const Memory& memory, const std::string& method, const std::vector<Task>& goals);

/// ChooseGoalByMetric, then solves only the chosen goal from its warm start.
MetricChoice SelectGoalByMetric(const Memory& memory, const std::string& method, const std::vector<Task>& goals,
                                const SolverOptions& options = {});

/// One racer of the ensemble: a problem with its warm start.
struct EnsembleCandidate {
  std::string name;
  Problem problem;
  Path warm_start;
};

enum class EnsembleMode { kSerial, kParallel };
enum class RaceStatus { kWon, kCancelled, kInvalid, kLostRace };
std::string ToString(RaceStatus status);

struct MethodTrace {
  std::string name;
  RaceStatus status = RaceStatus::kCancelled;
  /// Unset when the method never ran (serial mode after a winner).
  std::optional<SolveResult> result;
};

struct EnsembleResult {
  bool success = false;
  std::string winner;
  SolveResult result;
  std::vector<MethodTrace> traces;
  double wall_time = 0.0;
};

struct EnsembleOptions {
  EnsembleMode mode = EnsembleMode::kSerial;
  /// Parallel mode stops every racer after this long.
  std::chrono::duration<double> budget = std::chrono::seconds(30);
  SolverOptions solver;
};

/// First valid result wins. Serial mode runs candidates in order and stops at the
/// first valid one; parallel mode races one thread per candidate and cancels the
/// rest once a valid result commits.
EnsembleResult EnsembleSolve(const std::vector<EnsembleCandidate>& candidates, const EnsembleOptions& options = {});

/// Candidates for `methods` on `task`. A name of the form "metric:<method>"
/// expands a Cartesian task over IK goals (using `metric_memory`, which must then
/// be given) and races the chosen configuration goal.
std::vector<EnsembleCandidate> MakeCandidates(const Memory& memory, const std::vector<std::string>& methods,
                                              const Task& task, const Memory* metric_memory = nullptr,
                                              std::uint64_t seed = 0, int ik_goals = 5);

}  // namespace memmo
