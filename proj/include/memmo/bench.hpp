#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memmo/memory.hpp"

namespace memmo {

/// Goal selection by memory-as-metric for a Cartesian scenario: the memory of
/// another (fixed-init, configuration-goal) scenario ranks IK goals.
struct MetricVariant {
  std::filesystem::path scenario_file;
  std::string method = "gpr_pca";
  int ik_goals = 5;
};

/// A benchmark case read from a JSON scenario document (schema in docs/formats.md).
struct Scenario {
  std::string id;
  std::filesystem::path file;
  std::filesystem::path env_file;
  EnvironmentPtr env;
  TaskSpec spec;
  MemoryConfig memory;
  int n_train = 200;
  int n_test = 100;
  std::uint64_t seed = 1;
  /// Seed of the held-out batch; distinct from `seed` so no test task is a training draw.
  std::uint64_t test_seed = 2;
  bool include_std = true;
  /// Ensemble order; entries are memory methods, "std" or "metric".
  std::vector<std::string> ensemble;
  std::optional<MetricVariant> metric;
  std::vector<int> sweep_sizes;

  void Validate() const;
};

/// Relative paths inside the document resolve against the scenario file's directory.
Scenario LoadScenario(const std::filesystem::path& file);
Scenario ScenarioFromJson(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct EvalOptions {
  std::filesystem::path out_dir = "out";
  /// Reuse a memory cached under out_dir/memory when its provenance matches.
  bool use_cache = true;
  /// Memory cache root; defaults to out_dir/memory.
  std::optional<std::filesystem::path> cache_dir;
  bool allow_build = true;
  /// Directory of a prebuilt memory to use instead of the cache.
  std::optional<std::filesystem::path> memory_dir;
  EnsembleMode mode = EnsembleMode::kSerial;
  /// Put wall-clock statistics into report.csv (otherwise "NA"; they always go to timing.csv).
  bool wall_time_in_report = false;
  /// Tasks rendered as SVG overlays.
  int svg_tasks = 3;
  /// Overrides scenario n_train / n_test when positive.
  int n_train = 0;
  int n_test = 0;
  bool quiet = true;
};

/// One solve of one held-out task by one method.
struct TaskRecord {
  int task = 0;
  std::string method;
  bool success = false;
  double cost = 0.0;
  int iterations = 0;
  double time = 0.0;
  std::string termination;
  double max_violation = 0.0;
  double prediction_time = 0.0;
  /// Ensemble winner, or the goal index picked by the metric.
  std::string detail;
  Path path;
};

struct Stat {
  int count = 0;
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample standard deviation (0 for a single value).
Stat Summarize(const std::vector<double>& values);

struct ReportRow {
  std::string method;
  double success_pct = 0.0;
  Stat time;
  Stat cost;
  Stat iterations;
  int n_test = 0;
  std::uint64_t seed = 0;
};

/// Rows from per-task records; cost, time and iteration statistics use successful solves only.
std::vector<ReportRow> Aggregate(const std::vector<TaskRecord>& records, const std::vector<std::string>& methods,
                                 int n_test, std::uint64_t seed);

struct ScenarioReport {
  std::vector<ReportRow> rows;
  std::vector<TaskRecord> records;
  std::vector<Task> tasks;
  BuildInfo build;
};

/// Builds or loads the memory, evaluates every row on a fresh test batch and
/// writes report.csv, timing.csv, raw.jsonl and SVG overlays into out_dir.
ScenarioReport RunScenario(const Scenario& scenario, const EvalOptions& options);

/// Row order of a scenario report: std, memory methods, metric, ensemble.
std::vector<std::string> ReportMethods(const Scenario& scenario);

struct SweepReport {
  std::vector<int> sizes;
  std::vector<std::vector<ReportRow>> rows;
};

/// Evaluates nested prefixes of one memory build on one fixed test batch and
/// writes sweep.csv (long format) plus a report per size.
SweepReport RunSizeSweep(const Scenario& scenario, const std::vector<int>& sizes, const EvalOptions& options);

std::string ReportCsv(const std::vector<ReportRow>& rows, bool with_time);
std::string TimingCsv(const std::vector<ReportRow>& rows);
nlohmann::json RecordToJson(const TaskRecord& r);
TaskRecord RecordFromJson(const nlohmann::json& j);

/// Environment with one or more labelled paths, as standalone SVG.
std::string RenderSvg(const Environment& env, const std::vector<std::pair<std::string, Path>>& paths,
                      const std::optional<Vector2>& target = std::nullopt);

/// Memory for a scenario: loaded from `dir` when it holds a matching build, else
/// built (when allowed) and saved there.
Memory ObtainMemory(const Scenario& scenario, int n_train, const std::filesystem::path& dir, bool use_cache,
                    bool allow_build);

}  // namespace memmo
