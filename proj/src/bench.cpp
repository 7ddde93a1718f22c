#include "memmo/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace memmo {

namespace {

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void WriteFile(const std::filesystem::path& file, const std::string& text) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  out << text;
}

nlohmann::json ReadJson(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open " + file.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
}

std::uint64_t TaskSeed(std::uint64_t test_seed, int task) {
  return test_seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(task + 1));
}

std::filesystem::path CacheDir(const EvalOptions& options, const Scenario& s, int n_train) {
  const auto root = options.cache_dir ? *options.cache_dir : options.out_dir / "memory";
  return root / (s.id + "-n" + std::to_string(n_train) + "-s" + std::to_string(s.seed));
}

struct Evaluator {
  const Scenario& scenario;
  const Memory& memory;
  const Memory* metric_memory;
  EnsembleMode mode;

  std::string MetricName() const { return "metric_" + scenario.metric->method; }

  /// Candidate name understood by MakeCandidates for a report row.
  std::string CandidateName(const std::string& row) const {
    if (row == "metric") return "metric:" + scenario.metric->method;
    if (scenario.metric && row == MetricName()) return "metric:" + scenario.metric->method;
    return row;
  }

  std::vector<TaskRecord> Run(int index, const Task& task) const {
    const std::uint64_t seed = TaskSeed(scenario.test_seed, index);
    std::vector<std::string> rows;
    if (scenario.include_std) rows.push_back("std");
    for (const auto& m : scenario.memory.methods) rows.push_back(m);
    if (scenario.metric) rows.push_back(MetricName());

    std::vector<TaskRecord> out;
    std::vector<EnsembleCandidate> candidates;
    for (const auto& row : rows) {
      const auto started = std::chrono::steady_clock::now();
      auto made = MakeCandidates(memory, {CandidateName(row)}, task, metric_memory, seed,
                                 scenario.metric ? scenario.metric->ik_goals : 5);
      const double prediction = Seconds(started);
      EnsembleCandidate& c = made.front();
      c.name = row;
      TaskRecord r;
      r.task = index;
      r.method = row;
      r.prediction_time = prediction;
      SolveResult s;
      try {
        s = Solve(c.problem, c.warm_start, scenario.memory.solver);
      } catch (const SolverError&) {
        s.valid = false;
        s.termination = Termination::kMaxIter;
        s.path = c.warm_start;
      }
      r.success = s.valid;
      r.cost = s.cost;
      r.iterations = s.iterations;
      r.time = s.wall_time;
      r.termination = ToString(s.termination);
      r.max_violation = s.max_violation;
      r.path = s.path;
      out.push_back(std::move(r));
      candidates.push_back(std::move(c));
    }

    if (!scenario.ensemble.empty()) {
      TaskRecord e;
      e.task = index;
      e.method = "ensemble";
      if (mode == EnsembleMode::kSerial) {
        // Serial first-success semantics replayed over the solves above.
        for (const auto& name : scenario.ensemble) {
          const std::string row = name == "metric" ? MetricName() : name;
          const auto it = std::find_if(out.begin(), out.end(), [&](const TaskRecord& r) { return r.method == row; });
          e.time += it->time;
          e.prediction_time += it->prediction_time;
          if (it->success) {
            e.success = true;
            e.cost = it->cost;
            e.iterations = it->iterations;
            e.termination = it->termination;
            e.max_violation = it->max_violation;
            e.detail = row;
            e.path = it->path;
            break;
          }
        }
        if (!e.success) e.termination = "failed";
      } else {
        std::vector<EnsembleCandidate> racers;
        for (const auto& name : scenario.ensemble) {
          const std::string row = name == "metric" ? MetricName() : name;
          for (const auto& c : candidates) {
            if (c.name == row) racers.push_back(c);
          }
        }
        EnsembleOptions opts;
        opts.mode = EnsembleMode::kParallel;
        opts.solver = scenario.memory.solver;
        const EnsembleResult res = EnsembleSolve(racers, opts);
        e.success = res.success;
        e.cost = res.result.cost;
        e.iterations = res.result.iterations;
        e.time = res.wall_time;
        e.termination = res.success ? ToString(res.result.termination) : "failed";
        e.max_violation = res.result.max_violation;
        e.detail = res.winner;
        e.path = res.result.path;
      }
      out.push_back(std::move(e));
    }
    return out;
  }
};

std::vector<TaskRecord> EvaluateAll(const Evaluator& ev, const std::vector<Task>& tasks, bool quiet) {
  std::vector<std::vector<TaskRecord>> per_task(tasks.size());
  const int n = static_cast<int>(tasks.size());
  std::vector<std::string> errors(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      per_task[static_cast<std::size_t>(i)] = ev.Run(i, tasks[static_cast<std::size_t>(i)]);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) throw Error("task " + std::to_string(i) + ": " + errors[i]);
  }
  std::vector<TaskRecord> records;
  for (auto& v : per_task) {
    for (auto& r : v) records.push_back(std::move(r));
  }
  if (!quiet) std::cerr << "evaluated " << n << " tasks\n";
  return records;
}

std::vector<Task> TestTasks(const Scenario& s, int n_test, const Environment& env) {
  std::vector<Task> tasks;
  for (int i = 0; i < n_test; ++i) {
    Rng rng = DeriveRng(s.test_seed, static_cast<std::uint64_t>(i));
    tasks.push_back(SampleTask(env, s.spec, rng));
  }
  return tasks;
}

void WriteOutputs(const std::filesystem::path& dir, const Environment& env, const std::vector<ReportRow>& rows,
                  const std::vector<TaskRecord>& records, const std::vector<Task>& tasks, const EvalOptions& options) {
  std::string report = ReportCsv(rows, options.wall_time_in_report);
  if (options.mode == EnsembleMode::kParallel) {
    report = "# ensemble row raced in parallel: its time and outcome are machine-dependent\n" + report;
  }
  WriteFile(dir / "report.csv", report);
  WriteFile(dir / "timing.csv", TimingCsv(rows));
  std::ostringstream raw;
  for (const auto& r : records) raw << RecordToJson(r).dump() << "\n";
  WriteFile(dir / "raw.jsonl", raw.str());
  for (int t = 0; t < std::min<int>(options.svg_tasks, static_cast<int>(tasks.size())); ++t) {
    std::vector<std::pair<std::string, Path>> paths;
    for (const auto& r : records) {
      if (r.task == t && r.path.size() > 0) paths.emplace_back(r.method + (r.success ? "" : " (failed)"), r.path);
    }
    std::optional<Vector2> target;
    if (!tasks[static_cast<std::size_t>(t)].has_configuration_goal()) {
      target = tasks[static_cast<std::size_t>(t)].cartesian_goal;
    }
    char name[32];
    std::snprintf(name, sizeof(name), "task_%03d.svg", t);
    WriteFile(dir / "svg" / name, RenderSvg(env, paths, target));
  }
}

}  // namespace

void Scenario::Validate() const {
  if (id.empty()) throw ConfigError("scenario: missing id");
  if (!env) throw ConfigError("scenario " + id + ": missing environment");
  if (n_train < 1) throw ConfigError("scenario " + id + ": n_train must be positive");
  if (n_test < 1) throw ConfigError("scenario " + id + ": n_test must be positive");
  if (seed == test_seed) throw ConfigError("scenario " + id + ": test_seed must differ from seed");
  try {
    spec.Validate(*env);
    memory.Validate();
  } catch (const InputError& e) {
    throw ConfigError("scenario " + id + ": " + e.what());
  }
  for (const auto& e : ensemble) {
    const bool known = e == "std" || (e == "metric" && metric) ||
                       std::find(memory.methods.begin(), memory.methods.end(), e) != memory.methods.end();
    if (!known) throw ConfigError("scenario " + id + ": ensemble entry '" + e + "' is not evaluated");
    if (e == "std" && !include_std) throw ConfigError("scenario " + id + ": ensemble uses std but include_std is off");
  }
  if (metric && spec.family != TaskFamily::kCfgToCartesian) {
    throw ConfigError("scenario " + id + ": the metric variant needs Cartesian tasks");
  }
  if (!std::is_sorted(sweep_sizes.begin(), sweep_sizes.end())) {
    throw ConfigError("scenario " + id + ": sweep sizes must be ascending");
  }
}

Scenario ScenarioFromJson(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  try {
    Scenario s;
    s.id = doc.at("id").get<std::string>();
    s.env_file = base_dir / doc.at("environment").get<std::string>();
    s.env = std::make_shared<const Environment>(LoadEnvironment(s.env_file));
    s.spec = TaskSpecFromJson(doc.at("task_spec"));
    s.memory = MemoryConfigFromJson(doc.value("memory", nlohmann::json::object()));
    s.n_train = doc.value("n_train", s.n_train);
    s.n_test = doc.value("n_test", s.n_test);
    s.seed = doc.value("seed", s.seed);
    s.test_seed = doc.value("test_seed", s.seed + 1000003);
    s.include_std = doc.value("include_std", s.include_std);
    if (doc.contains("ensemble")) s.ensemble = doc.at("ensemble").get<std::vector<std::string>>();
    if (doc.contains("metric")) {
      MetricVariant m;
      m.scenario_file = base_dir / doc.at("metric").at("scenario").get<std::string>();
      m.method = doc.at("metric").value("method", m.method);
      m.ik_goals = doc.at("metric").value("ik_goals", m.ik_goals);
      if (m.ik_goals < 1) throw ConfigError("metric ik_goals must be positive");
      s.metric = m;
    }
    if (doc.contains("sweep_sizes")) s.sweep_sizes = doc.at("sweep_sizes").get<std::vector<int>>();
    s.Validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario LoadScenario(const std::filesystem::path& file) {
  Scenario s = ScenarioFromJson(ReadJson(file), file.parent_path());
  s.file = file;
  return s;
}

Stat Summarize(const std::vector<double>& values) {
  Stat s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.count;
  if (s.count > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / (s.count - 1));
  }
  return s;
}

std::vector<ReportRow> Aggregate(const std::vector<TaskRecord>& records, const std::vector<std::string>& methods,
                                 int n_test, std::uint64_t seed) {
  std::vector<ReportRow> rows;
  for (const auto& m : methods) {
    std::vector<double> time, cost, iters;
    int successes = 0;
    for (const auto& r : records) {
      if (r.method != m || !r.success) continue;
      ++successes;
      time.push_back(r.time);
      cost.push_back(r.cost);
      iters.push_back(r.iterations);
    }
    ReportRow row;
    row.method = m;
    row.success_pct = 100.0 * successes / n_test;
    row.time = Summarize(time);
    row.cost = Summarize(cost);
    row.iterations = Summarize(iters);
    row.n_test = n_test;
    row.seed = seed;
    rows.push_back(row);
  }
  return rows;
}

std::string ReportCsv(const std::vector<ReportRow>& rows, bool with_time) {
  std::ostringstream out;
  out << "method,success_pct,time_mean,time_std,cost_mean,cost_std,iter_mean,iter_std,n_test,seed\n";
  for (const auto& r : rows) {
    auto stat = [&](const Stat& s, const char* fmt, bool show) {
      if (!show || s.count == 0) return std::string("NA,NA");
      return Format(fmt, s.mean) + "," + Format(fmt, s.std);
    };
    out << r.method << "," << Format("%.1f", r.success_pct) << "," << stat(r.time, "%.4f", with_time) << ","
        << stat(r.cost, "%.6f", true) << "," << stat(r.iterations, "%.2f", true) << "," << r.n_test << ","
        << r.seed << "\n";
  }
  return out.str();
}

std::string TimingCsv(const std::vector<ReportRow>& rows) {
  std::ostringstream out;
  out << "# wall-clock seconds over successful solves; machine-dependent\n";
  out << "method,time_mean,time_std,n_success\n";
  for (const auto& r : rows) {
    out << r.method << ",";
    if (r.time.count == 0) {
      out << "NA,NA";
    } else {
      out << Format("%.6f", r.time.mean) << "," << Format("%.6f", r.time.std);
    }
    out << "," << r.time.count << "\n";
  }
  return out.str();
}

nlohmann::json RecordToJson(const TaskRecord& r) {
  return {{"task", r.task},
          {"method", r.method},
          {"success", r.success},
          {"cost", r.cost},
          {"iterations", r.iterations},
          {"time", r.time},
          {"termination", r.termination},
          {"max_violation", r.max_violation},
          {"prediction_time", r.prediction_time},
          {"detail", r.detail}};
}

TaskRecord RecordFromJson(const nlohmann::json& j) {
  TaskRecord r;
  r.task = j.at("task").get<int>();
  r.method = j.at("method").get<std::string>();
  r.success = j.at("success").get<bool>();
  r.cost = j.at("cost").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.time = j.at("time").get<double>();
  r.termination = j.at("termination").get<std::string>();
  r.max_violation = j.at("max_violation").get<double>();
  r.prediction_time = j.at("prediction_time").get<double>();
  r.detail = j.value("detail", "");
  return r;
}

std::vector<std::string> ReportMethods(const Scenario& scenario) {
  std::vector<std::string> rows;
  if (scenario.include_std) rows.push_back("std");
  for (const auto& m : scenario.memory.methods) rows.push_back(m);
  if (scenario.metric) rows.push_back("metric_" + scenario.metric->method);
  if (!scenario.ensemble.empty()) rows.push_back("ensemble");
  return rows;
}

Memory ObtainMemory(const Scenario& scenario, int n_train, const std::filesystem::path& dir, bool use_cache,
                    bool allow_build) {
  if (use_cache && std::filesystem::exists(dir / "meta.json")) {
    Memory cached = Memory::Load(dir);
    const nlohmann::json have = MemoryConfigToJson(cached.config());
    const nlohmann::json want = MemoryConfigToJson(scenario.memory);
    bool same_data = EnvironmentToJson(cached.env()) == EnvironmentToJson(*scenario.env) &&
                     TaskSpecToJson(cached.spec()) == TaskSpecToJson(scenario.spec) &&
                     cached.info().seed == scenario.seed && cached.info().requested == n_train;
    for (const char* key : {"steps", "solver", "retry_factor"}) same_data = same_data && have.at(key) == want.at(key);
    if (same_data && have == want) return cached;
    if (same_data) {
      // Only model settings changed: retrain on the stored paths.
      Memory retrained =
          Memory::Train(cached.env_ptr(), cached.spec(), cached.dataset(), scenario.memory, cached.info());
      retrained.Save(dir);
      return retrained;
    }
  }
  if (!allow_build) throw ConfigError("no memory for scenario " + scenario.id + " at " + dir.string());
  Memory built = Memory::Build(scenario.env, scenario.spec, n_train, scenario.memory, scenario.seed);
  built.Save(dir);
  return built;
}

ScenarioReport RunScenario(const Scenario& scenario, const EvalOptions& options) {
  scenario.Validate();
  const int n_train = options.n_train > 0 ? options.n_train : scenario.n_train;
  const int n_test = options.n_test > 0 ? options.n_test : scenario.n_test;
  if (options.n_test < 0) throw ConfigError("n_test must be positive");
  const Memory memory = options.memory_dir ? Memory::Load(*options.memory_dir)
                                           : ObtainMemory(scenario, n_train, CacheDir(options, scenario, n_train),
                                                          options.use_cache, options.allow_build);
  std::optional<Memory> metric_memory;
  if (scenario.metric) {
    const Scenario ms = LoadScenario(scenario.metric->scenario_file);
    metric_memory = ObtainMemory(ms, ms.n_train, CacheDir(options, ms, ms.n_train), options.use_cache,
                                 options.allow_build);
    if (!metric_memory->HasMethod(scenario.metric->method)) {
      throw ConfigError("metric memory lacks method " + scenario.metric->method);
    }
  }
  ScenarioReport report;
  report.build = memory.info();
  report.tasks = TestTasks(scenario, n_test, memory.env());
  const Evaluator ev{scenario, memory, metric_memory ? &*metric_memory : nullptr, options.mode};
  report.records = EvaluateAll(ev, report.tasks, options.quiet);
  report.rows = Aggregate(report.records, ReportMethods(scenario), n_test, scenario.seed);
  WriteOutputs(options.out_dir, memory.env(), report.rows, report.records, report.tasks, options);
  return report;
}

SweepReport RunSizeSweep(const Scenario& scenario, const std::vector<int>& sizes, const EvalOptions& options) {
  scenario.Validate();
  if (sizes.empty()) throw ConfigError("sweep: no sizes");
  if (!std::is_sorted(sizes.begin(), sizes.end()) || sizes.front() < 1 ||
      std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
    throw ConfigError("sweep: sizes must be positive and strictly ascending");
  }
  const int largest = sizes.back();
  const int n_test = options.n_test > 0 ? options.n_test : scenario.n_test;
  const Memory full = ObtainMemory(scenario, largest, CacheDir(options, scenario, largest), options.use_cache,
                                   options.allow_build);
  if (full.dataset().size() < largest) {
    throw ConfigError("sweep: the build stored only " + std::to_string(full.dataset().size()) + " paths");
  }
  std::optional<Memory> metric_memory;
  if (scenario.metric) {
    const Scenario ms = LoadScenario(scenario.metric->scenario_file);
    metric_memory = ObtainMemory(ms, ms.n_train, CacheDir(options, ms, ms.n_train), options.use_cache,
                                 options.allow_build);
  }
  const std::vector<Task> tasks = TestTasks(scenario, n_test, full.env());
  SweepReport sweep;
  std::ostringstream csv;
  csv << "size,method,success_pct,time_mean,time_std,cost_mean,cost_std,iter_mean,iter_std,n_test,seed\n";
  for (int size : sizes) {
    BuildInfo info = full.info();
    info.requested = size;
    const Memory memory =
        size == largest ? full
                        : Memory::Train(full.env_ptr(), full.spec(), full.dataset().Head(size), full.config(), info);
    const Evaluator ev{scenario, memory, metric_memory ? &*metric_memory : nullptr, options.mode};
    const auto records = EvaluateAll(ev, tasks, options.quiet);
    const auto rows = Aggregate(records, ReportMethods(scenario), n_test, scenario.seed);
    EvalOptions per_size = options;
    per_size.svg_tasks = 0;
    WriteOutputs(options.out_dir / ("size_" + std::to_string(size)), memory.env(), rows, records, tasks, per_size);
    std::istringstream lines(ReportCsv(rows, options.wall_time_in_report));
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) csv << size << "," << line << "\n";
    sweep.sizes.push_back(size);
    sweep.rows.push_back(rows);
  }
  WriteFile(options.out_dir / "sweep.csv", csv.str());
  return sweep;
}

std::string RenderSvg(const Environment& env, const std::vector<std::pair<std::string, Path>>& paths,
                      const std::optional<Vector2>& target) {
  // World bounds: obstacles, every drawn point and the arm's reach.
  Vector2 lo(1e9, 1e9), hi(-1e9, -1e9);
  auto grow = [&](const Vector2& p, double r) {
    lo = lo.cwiseMin(p - Vector2::Constant(r));
    hi = hi.cwiseMax(p + Vector2::Constant(r));
  };
  for (const auto& o : env.obstacles()) {
    if (const auto* c = std::get_if<Circle>(&o)) {
      grow(c->center, c->radius);
    } else {
      const auto& b = std::get<Box>(o);
      grow(b.lo, 0.0);
      grow(b.hi, 0.0);
    }
  }
  const bool arm = env.kind() == EnvKind::kArm;
  if (arm) grow(env.arm_base(), env.reach());
  for (const auto& [label, path] : paths) {
    for (int t = 0; t <= path.steps(); ++t) {
      if (!arm) grow(Vector2(path.at(t)[0], path.at(t)[1]), env.footprint_radius());
    }
  }
  if (target) grow(*target, 0.05);
  if (lo.x() > hi.x()) {
    lo = Vector2(-1, -1);
    hi = Vector2(1, 1);
  }
  lo -= Vector2::Constant(0.2);
  hi += Vector2::Constant(0.2);
  const double scale = 600.0 / std::max(hi.x() - lo.x(), hi.y() - lo.y());
  const double width = (hi.x() - lo.x()) * scale;
  const double height = (hi.y() - lo.y()) * scale;
  auto px = [&](const Vector2& p) {
    return Format("%.2f", (p.x() - lo.x()) * scale) + "," + Format("%.2f", (hi.y() - p.y()) * scale);
  };
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Format("%.0f", width) << "\" height=\""
      << Format("%.0f", height + 20.0 * static_cast<double>(paths.size())) << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& o : env.obstacles()) {
    if (const auto* c = std::get_if<Circle>(&o)) {
      const auto centre = px(c->center);
      const auto comma = centre.find(',');
      svg << "<circle cx=\"" << centre.substr(0, comma) << "\" cy=\"" << centre.substr(comma + 1) << "\" r=\""
          << Format("%.2f", c->radius * scale) << "\" fill=\"#999\"/>\n";
    } else {
      const auto& b = std::get<Box>(o);
      svg << "<rect x=\"" << Format("%.2f", (b.lo.x() - lo.x()) * scale) << "\" y=\""
          << Format("%.2f", (hi.y() - b.hi.y()) * scale) << "\" width=\""
          << Format("%.2f", (b.hi.x() - b.lo.x()) * scale) << "\" height=\""
          << Format("%.2f", (b.hi.y() - b.lo.y()) * scale) << "\" fill=\"#999\"/>\n";
    }
  }
  if (target) {
    const auto p = px(*target);
    const auto comma = p.find(',');
    svg << "<circle cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1)
        << "\" r=\"5\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  }
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const auto& [label, path] = paths[k];
    const char* color = kPalette[k % 10];
    std::string trace;
    for (int t = 0; t <= path.steps(); ++t) {
      const Vector q = path.at(t);
      const Vector2 point = arm ? ForwardKinematics(env, q).tip : Vector2(q[0], q[1]);
      trace += px(point) + " ";
      const bool key = t == 0 || t == path.steps() || t % 5 == 0;
      if (arm && key) {
        const auto chain = ForwardKinematics(env, q);
        std::string links;
        for (const auto& j : chain.joints) links += px(j) + " ";
        links += px(chain.tip);
        svg << "<polyline points=\"" << links << "\" fill=\"none\" stroke=\"" << color << "\" stroke-opacity=\""
            << (t == path.steps() ? "0.9" : "0.25") << "\" stroke-width=\"3\"/>\n";
      } else if (!arm && key) {
        const auto p = px(Vector2(q[0], q[1]));
        const auto comma = p.find(',');
        svg << "<circle cx=\"" << p.substr(0, comma) << "\" cy=\"" << p.substr(comma + 1) << "\" r=\""
            << Format("%.2f", env.footprint_radius() * scale) << "\" fill=\"" << color
            << "\" fill-opacity=\"0.15\" stroke=\"" << color << "\"/>\n";
      }
    }
    svg << "<polyline points=\"" << trace << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"8\" y=\"" << Format("%.0f", height + 15.0 + 20.0 * static_cast<double>(k)) << "\" fill=\""
        << color << "\" font-family=\"sans-serif\" font-size=\"14\">" << label << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace memmo
