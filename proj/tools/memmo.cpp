// Command-line front end: build, plan, eval, sweep and inspect.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "memmo/bench.hpp"

namespace {

using namespace memmo;

constexpr int kExitOk = 0;
constexpr int kExitPlanFailure = 1;
constexpr int kExitConfig = 2;

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string env_file;
  std::string memory_dir;
  std::string out_dir = "out";
  bool parallel = false;
  bool quiet = false;
};

nlohmann::json ReadJson(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

void WriteText(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << text;
}

Vector ParseVector(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json PathToJson(const Path& path) {
  nlohmann::json rows = nlohmann::json::array();
  for (int t = 0; t <= path.steps(); ++t) {
    const Vector q = path.at(t);
    rows.push_back(std::vector<double>(q.data(), q.data() + q.size()));
  }
  return rows;
}

nlohmann::json TaskToJson(const Task& task) {
  nlohmann::json j;
  j["family"] = ToString(task.family);
  j["q_init"] = std::vector<double>(task.q_init.data(), task.q_init.data() + task.q_init.size());
  if (task.has_configuration_goal()) {
    j["q_goal"] = std::vector<double>(task.q_goal.data(), task.q_goal.data() + task.q_goal.size());
  } else {
    j["target"] = {task.cartesian_goal.x(), task.cartesian_goal.y()};
  }
  return j;
}

Scenario ScenarioWithOverrides(const std::string& file, const Globals& g) {
  Scenario s = LoadScenario(file);
  if (g.seed) s.seed = *g.seed;
  if (!g.env_file.empty()) {
    s.env_file = g.env_file;
    s.env = std::make_shared<const Environment>(LoadEnvironment(g.env_file));
  }
  s.Validate();
  return s;
}

int RunBuild(const Globals& g, const std::string& scenario_file, const std::string& spec_file,
             const std::string& config_file, int size) {
  if (g.memory_dir.empty()) throw ConfigError("build: --memory <dir> is required");
  EnvironmentPtr env;
  TaskSpec spec;
  MemoryConfig config;
  std::uint64_t seed = g.seed.value_or(1);
  if (!scenario_file.empty()) {
    const Scenario s = ScenarioWithOverrides(scenario_file, g);
    env = s.env;
    spec = s.spec;
    config = s.memory;
    seed = s.seed;
    if (size <= 0) size = s.n_train;
  } else {
    if (g.env_file.empty() || spec_file.empty()) {
      throw ConfigError("build: give --scenario, or --env with --spec");
    }
    env = std::make_shared<const Environment>(LoadEnvironment(g.env_file));
    spec = TaskSpecFromJson(ReadJson(spec_file));
    if (!config_file.empty()) config = MemoryConfigFromJson(ReadJson(config_file));
  }
  if (size <= 0) throw ConfigError("build: --size must be positive");
  try {
    spec.Validate(*env);
    config.Validate();
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
  const Memory memory = Memory::Build(env, spec, size, config, seed);
  memory.Save(g.memory_dir);
  if (!g.quiet) {
    const BuildInfo& info = memory.info();
    std::cout << "stored " << info.accepted << "/" << info.requested << " paths from " << info.attempts
              << " attempts in " << info.wall_time << " s -> " << g.memory_dir << "\n";
  }
  return memory.info().complete ? kExitOk : kExitPlanFailure;
}

struct PlanArgs {
  std::string method = "gpr";
  std::string ensemble;
  std::string init;
  std::string goal;
  std::string target;
  int train_task = -1;
  int sample_task = -1;
  std::string metric_memory;
  int ik_goals = 5;
  double budget = 30.0;
};

Task PlanTask(const Memory& memory, const PlanArgs& a, std::uint64_t seed) {
  const TaskSpec& spec = memory.spec();
  const int dof = memory.env().dof();
  if (a.train_task >= 0) {
    if (a.train_task >= memory.dataset().size()) throw ConfigError("plan: --train-task out of range");
    return TaskFromDescriptor(spec.family, memory.dataset().X.row(a.train_task).transpose(), dof, spec.fixed_init);
  }
  if (a.sample_task >= 0) {
    Rng rng = DeriveRng(seed, static_cast<std::uint64_t>(a.sample_task));
    return SampleTask(memory.env(), spec, rng);
  }
  Task task;
  task.family = spec.family;
  task.q_init = a.init.empty() ? spec.fixed_init : ParseVector(a.init);
  if (spec.family == TaskFamily::kCfgToCartesian) {
    if (a.target.empty()) throw ConfigError("plan: Cartesian memories need --target x,y");
    const Vector t = ParseVector(a.target);
    if (t.size() != 2) throw ConfigError("plan: --target takes two numbers");
    task.cartesian_goal = Vector2(t[0], t[1]);
  } else {
    if (a.goal.empty()) throw ConfigError("plan: --goal is required");
    task.q_goal = ParseVector(a.goal);
  }
  if (task.q_init.size() != dof || (task.has_configuration_goal() && task.q_goal.size() != dof)) {
    throw ConfigError("plan: configurations need " + std::to_string(dof) + " entries");
  }
  return task;
}

int RunPlan(const Globals& g, const PlanArgs& a) {
  if (g.memory_dir.empty()) throw ConfigError("plan: --memory <dir> is required");
  const Memory memory = Memory::Load(g.memory_dir);
  std::optional<Memory> metric;
  if (!a.metric_memory.empty()) metric = Memory::Load(a.metric_memory);
  const std::uint64_t seed = g.seed.value_or(1);
  const Task task = PlanTask(memory, a, seed);

  nlohmann::json record;
  record["task"] = TaskToJson(task);
  record["method"] = a.method;
  const std::filesystem::path out(g.out_dir);
  auto fail = [&](const std::string& reason) {
    record["status"] = "failed";
    record["error"] = reason;
    WriteText(out / "plan.json", record.dump(2) + "\n");
    std::cout << record.dump() << "\n";
    return kExitPlanFailure;
  };

  if (!task.has_configuration_goal()) {
    const double distance = (task.cartesian_goal - memory.env().arm_base()).norm();
    if (distance > memory.env().reach()) return fail("target outside the reachable workspace");
  }

  std::vector<std::string> names;
  if (a.method == "ensemble") {
    std::stringstream in(a.ensemble);
    std::string item;
    while (std::getline(in, item, ',')) names.push_back(item);
    if (names.empty()) {
      names = memory.methods();
      names.insert(names.begin(), "std");
    }
  } else {
    names.push_back(a.method);
  }
  for (const auto& n : names) {
    const bool metric_name = n.rfind("metric:", 0) == 0;
    if (n != "std" && !metric_name && !memory.HasMethod(n)) throw ConfigError("plan: memory has no method '" + n + "'");
    if (metric_name && !metric) throw ConfigError("plan: " + n + " needs --metric-memory");
  }

  std::vector<EnsembleCandidate> candidates;
  try {
    candidates = MakeCandidates(memory, names, task, metric ? &*metric : nullptr, seed, a.ik_goals);
  } catch (const MetricError& e) {
    return fail(e.what());
  }
  EnsembleOptions options;
  options.mode = g.parallel ? EnsembleMode::kParallel : EnsembleMode::kSerial;
  options.budget = std::chrono::duration<double>(a.budget);
  options.solver = memory.config().solver;
  const EnsembleResult result = EnsembleSolve(candidates, options);

  record["winner"] = result.winner;
  record["valid"] = result.success;
  record["cost"] = result.result.cost;
  record["iterations"] = result.result.iterations;
  record["termination"] = ToString(result.result.termination);
  record["max_violation"] = result.result.max_violation;
  record["time"] = result.wall_time;
  nlohmann::json traces = nlohmann::json::array();
  for (const auto& t : result.traces) traces.push_back({{"method", t.name}, {"status", ToString(t.status)}});
  record["traces"] = traces;
  record["path"] = PathToJson(result.result.path);

  std::optional<Vector2> target;
  if (!task.has_configuration_goal()) target = task.cartesian_goal;
  WriteText(out / "plan.svg", RenderSvg(memory.env(), {{result.winner.empty() ? a.method : result.winner,
                                                        result.result.path}}, target));
  if (!result.success) return fail("no valid path (" + ToString(result.result.termination) + ")");
  record["status"] = "ok";
  WriteText(out / "plan.json", record.dump(2) + "\n");
  if (!g.quiet) std::cout << record.dump() << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string scenario;
  int n_train = 0;
  int n_test = 0;
  bool no_cache = false;
  std::string cache_dir;
  bool no_build = false;
  bool wall_time = false;
  int svg_tasks = 3;
  std::optional<std::uint64_t> test_seed;
  std::vector<int> sizes;
};

EvalOptions MakeEvalOptions(const Globals& g, const EvalArgs& a) {
  EvalOptions o;
  o.out_dir = g.out_dir;
  o.use_cache = !a.no_cache;
  if (!a.cache_dir.empty()) o.cache_dir = a.cache_dir;
  o.allow_build = !a.no_build;
  if (!g.memory_dir.empty()) o.memory_dir = g.memory_dir;
  o.mode = g.parallel ? EnsembleMode::kParallel : EnsembleMode::kSerial;
  o.wall_time_in_report = a.wall_time;
  o.svg_tasks = a.svg_tasks;
  o.n_train = a.n_train;
  o.n_test = a.n_test;
  o.quiet = g.quiet;
  return o;
}

int RunEval(const Globals& g, const EvalArgs& a) {
  Scenario s = ScenarioWithOverrides(a.scenario, g);
  if (a.test_seed) s.test_seed = *a.test_seed;
  const ScenarioReport report = RunScenario(s, MakeEvalOptions(g, a));
  if (!g.quiet) std::cout << ReportCsv(report.rows, a.wall_time);
  return kExitOk;
}

int RunSweep(const Globals& g, const EvalArgs& a) {
  Scenario s = ScenarioWithOverrides(a.scenario, g);
  if (a.test_seed) s.test_seed = *a.test_seed;
  const std::vector<int> sizes = a.sizes.empty() ? s.sweep_sizes : a.sizes;
  if (sizes.empty()) throw ConfigError("sweep: no sizes given and none in the scenario");
  const EvalOptions options = MakeEvalOptions(g, a);
  RunSizeSweep(s, sizes, options);
  if (!g.quiet) {
    std::ifstream in(std::filesystem::path(options.out_dir) / "sweep.csv");
    std::cout << in.rdbuf();
  }
  return kExitOk;
}

int RunInspect(const Globals& g) {
  if (g.memory_dir.empty()) throw ConfigError("inspect: --memory <dir> is required");
  const Memory memory = Memory::Load(g.memory_dir);
  std::cout << memory.Provenance().dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Memory of motion: build, query and benchmark warm-start memories"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Seed for builds and sampled tasks");
  app.add_option("--env", g.env_file, "Environment JSON file");
  app.add_option("--memory", g.memory_dir, "Memory directory");
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  auto* serial = app.add_flag("--serial", "Race ensemble methods one after another (default)");
  app.add_flag("--parallel", g.parallel, "Race ensemble methods on concurrent threads")->excludes(serial);
  app.add_flag("-q,--quiet", g.quiet, "Suppress stdout summaries");

  auto* build = app.add_subcommand("build", "Solve sampled tasks and store a trained memory");
  std::string scenario_file, spec_file, config_file;
  int size = 0;
  build->add_option("--scenario", scenario_file, "Scenario JSON (environment, task spec, memory config)");
  build->add_option("--spec", spec_file, "Task spec JSON, with --env");
  build->add_option("--config", config_file, "Memory config JSON, with --env");
  build->add_option("--size", size, "Number of stored paths");

  auto* plan = app.add_subcommand("plan", "Plan one task from a memory's warm start");
  PlanArgs pa;
  plan->add_option("--method", pa.method, "Method name, std, metric:<method> or ensemble")->capture_default_str();
  plan->add_option("--ensemble", pa.ensemble, "Comma-separated ensemble order");
  plan->add_option("--init", pa.init, "Initial configuration, comma-separated");
  plan->add_option("--goal", pa.goal, "Goal configuration, comma-separated");
  plan->add_option("--target", pa.target, "Cartesian goal x,y");
  plan->add_option("--train-task", pa.train_task, "Use the task of stored path i");
  plan->add_option("--sample-task", pa.sample_task, "Use task i drawn from the memory's spec under --seed");
  plan->add_option("--metric-memory", pa.metric_memory, "Fixed-init memory ranking IK goals");
  plan->add_option("--ik-goals", pa.ik_goals, "IK goals per Cartesian task")->capture_default_str();
  plan->add_option("--budget", pa.budget, "Parallel race budget in seconds")->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Evaluate a scenario and write report.csv, raw.jsonl and SVGs");
  auto* sweep = app.add_subcommand("sweep", "Evaluate nested training sizes of a scenario");
  for (auto* sub : {eval, sweep}) {
    sub->add_option("--scenario", ea.scenario, "Scenario JSON")->required();
    sub->add_option("--n-test", ea.n_test, "Override the number of test tasks");
    sub->add_flag("--no-cache", ea.no_cache, "Rebuild instead of reusing a cached memory");
    sub->add_option("--cache", ea.cache_dir, "Memory cache directory (default: <out>/memory)");
    sub->add_flag("--no-build", ea.no_build, "Fail instead of building a missing memory");
    sub->add_flag("--wall-time", ea.wall_time, "Include wall-clock columns in report.csv");
    sub->add_option("--test-seed", ea.test_seed, "Override the test batch seed");
  }
  eval->add_option("--n-train", ea.n_train, "Override the memory size");
  eval->add_option("--svg", ea.svg_tasks, "Tasks rendered as SVG overlays")->capture_default_str();
  sweep->add_option("--sizes", ea.sizes, "Ascending training sizes")->delimiter(',');
  sweep->callback([&] { ea.svg_tasks = 0; });

  auto* inspect = app.add_subcommand("inspect", "Print a memory's provenance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return kExitConfig;
  }

  try {
    if (build->parsed()) return RunBuild(g, scenario_file, spec_file, config_file, size);
    if (plan->parsed()) return RunPlan(g, pa);
    if (eval->parsed()) return RunEval(g, ea);
    if (sweep->parsed()) return RunSweep(g, ea);
    if (inspect->parsed()) return RunInspect(g);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPlanFailure;
  }
  return kExitConfig;
}
