#include "memmo/memory.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <mutex>
#include <stop_token>
#include <thread>

namespace memmo {

namespace {

constexpr int kBuildBatch = 32;
constexpr int kMemoryFormat = 1;

std::string BaseMethod(const std::string& method) {
  return UsesPca(method) ? method.substr(0, method.size() - 4) : method;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

nlohmann::json SolverOptionsToJson(const SolverOptions& o) {
  return {{"max_iterations", o.max_iterations},
          {"initial_penalty", o.initial_penalty},
          {"penalty_growth", o.penalty_growth},
          {"max_penalty", o.max_penalty},
          {"gradient_tolerance", o.gradient_tolerance},
          {"collision_tolerance", o.collision_tolerance},
          {"terminal_tolerance", o.terminal_tolerance},
          {"limit_tolerance", o.limit_tolerance},
          {"fd_step", o.fd_step},
          {"max_line_search", o.max_line_search},
          {"active_margin", o.active_margin}};
}

SolverOptions SolverOptionsFromJson(const nlohmann::json& j) {
  SolverOptions o;
  o.max_iterations = j.value("max_iterations", o.max_iterations);
  o.initial_penalty = j.value("initial_penalty", o.initial_penalty);
  o.penalty_growth = j.value("penalty_growth", o.penalty_growth);
  o.max_penalty = j.value("max_penalty", o.max_penalty);
  o.gradient_tolerance = j.value("gradient_tolerance", o.gradient_tolerance);
  o.collision_tolerance = j.value("collision_tolerance", o.collision_tolerance);
  o.terminal_tolerance = j.value("terminal_tolerance", o.terminal_tolerance);
  o.limit_tolerance = j.value("limit_tolerance", o.limit_tolerance);
  o.fd_step = j.value("fd_step", o.fd_step);
  o.max_line_search = j.value("max_line_search", o.max_line_search);
  o.active_margin = j.value("active_margin", o.active_margin);
  return o;
}

}  // namespace

bool UsesPca(const std::string& method) {
  return method.size() > 4 && method.compare(method.size() - 4, 4, "_pca") == 0;
}

bool IsKnownMethod(const std::string& name) {
  const std::string base = BaseMethod(name);
  return base == "knn" || base == "gpr" || base == "bgmr";
}

void MemoryConfig::Validate() const {
  if (methods.empty()) throw InputError("memory: at least one method is required");
  for (const auto& m : methods) {
    if (!IsKnownMethod(m)) throw InputError("memory: unknown method '" + m + "'");
  }
  if (steps < 1) throw InputError("memory: steps must be positive");
  if (pca_components < 0) throw InputError("memory: pca_components must be non-negative");
  if (retry_factor < 1) throw InputError("memory: retry_factor must be positive");
  GprHyper probe;
  probe.length_scale = gpr.length_scale.value_or(1.0);
  probe.signal_variance = gpr.signal_variance.value_or(1.0);
  probe.noise_variance = gpr.noise_variance;
  probe.Validate();
}

GprHyper GprConfig::Resolve(const Matrix& X, const Matrix& Y) const {
  GprHyper h = GprHyper::Defaults(X, Y);
  if (length_scale) h.length_scale = *length_scale;
  if (signal_variance) h.signal_variance = *signal_variance;
  h.noise_variance = noise_variance;
  return h;
}

nlohmann::json MemoryConfigToJson(const MemoryConfig& c) {
  nlohmann::json j;
  j["methods"] = c.methods;
  j["steps"] = c.steps;
  j["pca_components"] = c.pca_components;
  j["knn"] = {{"k", c.knn.k}, {"standardize", c.knn.standardize}};
  j["gpr"] = {{"length_scale", c.gpr.length_scale ? nlohmann::json(*c.gpr.length_scale) : nlohmann::json()},
              {"signal_variance", c.gpr.signal_variance ? nlohmann::json(*c.gpr.signal_variance) : nlohmann::json()},
              {"noise_variance", c.gpr.noise_variance}};
  j["bgmr"] = {{"max_components", c.bgmr.max_components},
               {"weight_concentration", c.bgmr.weight_concentration},
               {"mean_precision", c.bgmr.mean_precision},
               {"extra_dof", c.bgmr.extra_dof},
               {"prior_scale", c.bgmr.prior_scale},
               {"variance_floor", c.bgmr.variance_floor},
               {"max_iterations", c.bgmr.max_iterations},
               {"tolerance", c.bgmr.tolerance},
               {"prune_weight", c.bgmr.prune_weight},
               {"greedy_deletion", c.bgmr.greedy_deletion},
               {"seed", c.bgmr.seed}};
  j["solver"] = SolverOptionsToJson(c.solver);
  j["retry_factor"] = c.retry_factor;
  return j;
}

MemoryConfig MemoryConfigFromJson(const nlohmann::json& j) {
  try {
    MemoryConfig c;
    if (j.contains("methods")) c.methods = j.at("methods").get<std::vector<std::string>>();
    c.steps = j.value("steps", c.steps);
    c.pca_components = j.value("pca_components", c.pca_components);
    if (j.contains("knn")) {
      c.knn.k = j.at("knn").value("k", c.knn.k);
      c.knn.standardize = j.at("knn").value("standardize", c.knn.standardize);
    }
    if (j.contains("gpr") && !j.at("gpr").is_null()) {
      const auto& g = j.at("gpr");
      if (g.contains("length_scale") && !g.at("length_scale").is_null()) {
        c.gpr.length_scale = g.at("length_scale").get<double>();
      }
      if (g.contains("signal_variance") && !g.at("signal_variance").is_null()) {
        c.gpr.signal_variance = g.at("signal_variance").get<double>();
      }
      c.gpr.noise_variance = g.value("noise_variance", c.gpr.noise_variance);
    }
    if (j.contains("bgmr")) {
      const auto& b = j.at("bgmr");
      c.bgmr.max_components = b.value("max_components", c.bgmr.max_components);
      c.bgmr.weight_concentration = b.value("weight_concentration", c.bgmr.weight_concentration);
      c.bgmr.mean_precision = b.value("mean_precision", c.bgmr.mean_precision);
      c.bgmr.extra_dof = b.value("extra_dof", c.bgmr.extra_dof);
      c.bgmr.prior_scale = b.value("prior_scale", c.bgmr.prior_scale);
      c.bgmr.variance_floor = b.value("variance_floor", c.bgmr.variance_floor);
      c.bgmr.max_iterations = b.value("max_iterations", c.bgmr.max_iterations);
      c.bgmr.tolerance = b.value("tolerance", c.bgmr.tolerance);
      c.bgmr.prune_weight = b.value("prune_weight", c.bgmr.prune_weight);
      c.bgmr.greedy_deletion = b.value("greedy_deletion", c.bgmr.greedy_deletion);
      c.bgmr.seed = b.value("seed", c.bgmr.seed);
    }
    if (j.contains("solver")) c.solver = SolverOptionsFromJson(j.at("solver"));
    c.retry_factor = j.value("retry_factor", c.retry_factor);
    c.Validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed memory config: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

Problem ProblemForTask(const EnvironmentPtr& env, const Task& task, int steps) {
  Problem p;
  p.env = env;
  p.q_init = task.q_init;
  if (task.has_configuration_goal()) {
    p.terminal = task.q_goal;
  } else {
    p.terminal = Vector2(task.cartesian_goal);
  }
  p.steps = steps;
  return p;
}

Path StraightLineGuess(const Environment& env, const TaskSpec& spec, const Task& task, int steps, Rng& rng) {
  if (task.has_configuration_goal()) {
    const auto via = ChooseWaypoints(spec, rng);
    return StraightLinePath(task.q_init, task.q_goal, steps, via);
  }
  const IkResult ik = InverseKinematics(env, task.cartesian_goal, 5, rng);
  if (ik.solutions.empty()) return StraightLinePath(task.q_init, task.q_init, steps);
  return StraightLinePath(task.q_init, ik.solutions.front(), steps);
}

Memory Memory::Build(EnvironmentPtr env, TaskSpec spec, int size, MemoryConfig config, std::uint64_t seed,
                     std::vector<BuildSample>* samples) {
  if (!env) throw InputError("memory: missing environment");
  if (size < 1) throw InputError("memory: size must be positive");
  config.Validate();
  spec.Validate(*env);
  const auto started = std::chrono::steady_clock::now();
  const int ceiling = config.retry_factor * size;
  const int steps = config.steps;

  struct Attempt {
    bool sampled = false;
    Task task;
    SolveResult result;
  };
  auto attempt = [&](int index) {
    Attempt a;
    Rng rng = DeriveRng(seed, static_cast<std::uint64_t>(index));
    try {
      a.task = SampleTask(*env, spec, rng);
      a.sampled = true;
      const Path guess = StraightLineGuess(*env, spec, a.task, steps, rng);
      a.result = Solve(ProblemForTask(env, a.task, steps), guess, config.solver);
    } catch (const SamplingError&) {
      a.result.valid = false;
    } catch (const SolverError&) {
      a.result.valid = false;
    }
    return a;
  };

  std::vector<Vector> xs;
  std::vector<Vector> ys;
  int attempts = 0;
  for (int next = 0; static_cast<int>(xs.size()) < size && next < ceiling;) {
    const int batch = std::min(kBuildBatch, ceiling - next);
    std::vector<Attempt> results(static_cast<std::size_t>(batch));
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < batch; ++b) results[static_cast<std::size_t>(b)] = attempt(next + b);
    for (int b = 0; b < batch && static_cast<int>(xs.size()) < size; ++b) {
      auto& a = results[static_cast<std::size_t>(b)];
      ++attempts;
      if (a.sampled && a.result.valid) {
        xs.push_back(a.task.Descriptor());
        ys.push_back(a.result.path.Flatten());
      }
      if (samples != nullptr && a.sampled) samples->push_back({std::move(a.task), std::move(a.result)});
    }
    next += batch;
  }
  if (xs.empty()) throw SamplingError("memory: no valid sample after " + std::to_string(attempts) + " attempts");

  Dataset data;
  data.X.resize(static_cast<Eigen::Index>(xs.size()), xs.front().size());
  data.Y.resize(static_cast<Eigen::Index>(ys.size()), ys.front().size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    data.X.row(static_cast<Eigen::Index>(i)) = xs[i].transpose();
    data.Y.row(static_cast<Eigen::Index>(i)) = ys[i].transpose();
  }
  data.dof = env->dof();
  data.steps = steps;
  data.env_id = env->id();

  BuildInfo info;
  info.seed = seed;
  info.requested = size;
  info.attempts = attempts;
  info.accepted = static_cast<int>(xs.size());
  info.complete = info.accepted == size;
  Memory memory = Train(std::move(env), std::move(spec), std::move(data), std::move(config), info);
  memory.info_.wall_time = Seconds(started);
  return memory;
}

Memory Memory::Train(EnvironmentPtr env, TaskSpec spec, Dataset data, MemoryConfig config, BuildInfo info) {
  if (!env) throw InputError("memory: missing environment");
  config.Validate();
  data.Validate();
  if (data.pca_coded) throw InputError("memory: expects raw paths, not PCA codes");
  if (data.Y.cols() != env->dof() * (config.steps + 1)) {
    throw InputError("memory: dataset paths do not match dof and steps");
  }
  if (data.X.cols() != spec.descriptor_dim(env->dof())) {
    throw InputError("memory: dataset descriptors do not match the task family");
  }
  const auto started = std::chrono::steady_clock::now();
  Memory m;
  m.env_ = std::move(env);
  m.spec_ = std::move(spec);
  m.config_ = std::move(config);
  m.data_ = std::move(data);
  m.info_ = info;
  m.info_.accepted = m.data_.size();

  Matrix codes;
  const bool need_pca = std::any_of(m.config_.methods.begin(), m.config_.methods.end(), UsesPca);
  if (need_pca) {
    const int n = m.data_.size();
    if (n < 2) throw InputError("memory: PCA methods need at least two stored paths");
    const int dims = static_cast<int>(m.data_.Y.cols());
    const int comps = m.config_.pca_components > 0 ? std::min({m.config_.pca_components, n, dims})
                                                   : PcaProjection::DefaultComponents(n, dims);
    m.pca_ = PcaProjection::Fit(m.data_.Y, comps);
    codes = m.pca_->EncodeRows(m.data_.Y);
    m.info_.pca_bound = (m.pca_->DecodeRows(codes) - m.data_.Y).cwiseAbs().maxCoeff();
  } else {
    m.info_.pca_bound = 0.0;
  }

  for (const auto& method : m.config_.methods) {
    const Matrix& y = UsesPca(method) ? codes : m.data_.Y;
    const std::string base = BaseMethod(method);
    if (base == "knn") {
      KnnOptions opts = m.config_.knn;
      opts.k = std::min(opts.k, m.data_.size());
      m.models_[method] = std::make_shared<const KnnModel>(KnnModel::Fit(m.data_.X, y, opts));
    } else if (base == "gpr") {
      const GprHyper hyper = m.config_.gpr.Resolve(m.data_.X, y);
      m.models_[method] = std::make_shared<const GprModel>(GprModel::Fit(m.data_.X, y, hyper));
    } else {
      m.models_[method] = std::make_shared<const BgmrModel>(BgmrModel::Fit(m.data_.X, y, m.config_.bgmr));
    }
  }
  if (info.wall_time == 0.0) m.info_.wall_time = Seconds(started);
  return m;
}

const Regressor& Memory::model(const std::string& method) const {
  const auto it = models_.find(method);
  if (it == models_.end()) throw InputError("memory: method '" + method + "' is not trained");
  return *it->second;
}

std::vector<std::string> Memory::methods() const { return config_.methods; }

Path Memory::ToPath(const Vector& output, bool coded, const Task& task) const {
  const Vector flat = coded ? pca_->Decode(output) : output;
  Path path = Path::FromFlat(flat, env_->dof(), config_.steps);
  path.at(0) = task.q_init;
  if (task.has_configuration_goal()) path.at(config_.steps) = task.q_goal;
  return path;
}

Path Memory::PredictWarmStart(const std::string& method, const Task& task) const {
  const Regressor& r = model(method);
  return ToPath(r.Predict(task.Descriptor()).y, UsesPca(method), task);
}

std::vector<Path> Memory::PredictWarmStarts(const std::string& method, const Task& task, int top) const {
  const Regressor& r = model(method);
  std::vector<Path> out;
  for (const auto& p : r.PredictModes(task.Descriptor(), top)) out.push_back(ToPath(p.y, UsesPca(method), task));
  return out;
}

nlohmann::json Memory::Provenance() const {
  nlohmann::json j;
  j["format"] = kMemoryFormat;
  j["env_id"] = env_->id();
  j["environment"] = EnvironmentToJson(*env_);
  j["task_spec"] = TaskSpecToJson(spec_);
  j["family"] = ToString(spec_.family);
  j["dof"] = env_->dof();
  j["steps"] = config_.steps;
  j["n_train"] = data_.size();
  j["descriptor_dim"] = data_.X.cols();
  j["path_dim"] = data_.Y.cols();
  j["config"] = MemoryConfigToJson(config_);
  j["pca_components"] = pca_ ? pca_->components() : 0;
  j["build"] = {{"seed", info_.seed},
                {"requested", info_.requested},
                {"attempts", info_.attempts},
                {"accepted", info_.accepted},
                {"acceptance_rate", info_.acceptance_rate()},
                {"complete", info_.complete},
                {"wall_time", info_.wall_time},
                {"pca_bound", info_.pca_bound}};
  nlohmann::json models = nlohmann::json::object();
  for (const auto& [name, r] : models_) {
    nlohmann::json entry = {{"file", "model_" + name + ".bin"}, {"kind", r->kind()}};
    if (const auto* b = dynamic_cast<const BgmrModel*>(r.get())) {
      entry["components"] = b->components();
      entry["converged"] = b->converged();
    }
    models[name] = entry;
  }
  j["models"] = models;
  return j;
}

void Memory::Save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "meta.json");
    if (!out) throw ConfigError("cannot write " + (dir / "meta.json").string());
    out << Provenance().dump(2) << "\n";
  }
  SaveContainer(dir / "dataset.bin", DatasetToContainer(data_));
  if (pca_) SaveContainer(dir / "pca.bin", pca_->ToContainer());
  for (const auto& [name, r] : models_) SaveContainer(dir / ("model_" + name + ".bin"), r->ToContainer());
}

Memory Memory::Load(const std::filesystem::path& dir) {
  std::ifstream in(dir / "meta.json");
  if (!in) throw ConfigError("no memory at " + dir.string() + " (missing meta.json)");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed meta.json: ") + e.what());
  }
  if (meta.value("format", 0) != kMemoryFormat) throw ConfigError("unsupported memory format");
  Memory m;
  m.env_ = std::make_shared<const Environment>(EnvironmentFromJson(meta.at("environment")));
  m.spec_ = TaskSpecFromJson(meta.at("task_spec"));
  m.config_ = MemoryConfigFromJson(meta.at("config"));
  m.data_ = DatasetFromContainer(LoadContainer(dir / "dataset.bin"));
  const auto& b = meta.at("build");
  m.info_.seed = b.at("seed").get<std::uint64_t>();
  m.info_.requested = b.at("requested").get<int>();
  m.info_.attempts = b.at("attempts").get<int>();
  m.info_.accepted = b.at("accepted").get<int>();
  m.info_.complete = b.at("complete").get<bool>();
  m.info_.wall_time = b.at("wall_time").get<double>();
  m.info_.pca_bound = b.at("pca_bound").get<double>();
  if (std::filesystem::exists(dir / "pca.bin")) m.pca_ = PcaProjection::FromContainer(LoadContainer(dir / "pca.bin"));
  for (const auto& method : m.config_.methods) {
    m.models_[method] = RegressorFromContainer(LoadContainer(dir / ("model_" + method + ".bin")));
    if (UsesPca(method) && !m.pca_) throw ConfigError("memory: " + method + " needs pca.bin");
  }
  return m;
}

std::vector<Task> ExpandCartesianGoal(const Environment& env, const Task& task, int count, Rng& rng) {
  if (task.family != TaskFamily::kCfgToCartesian) throw InputError("ExpandCartesianGoal: needs a Cartesian task");
  const IkResult ik = InverseKinematics(env, task.cartesian_goal, count, rng);
  std::vector<Task> goals;
  for (const auto& q : ik.solutions) {
    if (SignedDistance(env, q) < 0.0 || !env.WithinLimits(q)) continue;
    Task goal;
    goal.family = TaskFamily::kFixedInitToCfg;
    goal.q_init = task.q_init;
    goal.q_goal = q;
    goals.push_back(std::move(goal));
  }
  if (goals.empty()) {
    throw MetricError(ik.unreachable ? "Cartesian goal is out of reach" : "no collision-free IK solution found");
  }
  return goals;
}

MetricChoice ChooseGoalByMetric(const Memory& memory, const std::string& method, const std::vector<Task>& goals) {
  if (goals.empty()) throw InputError("metric: empty goal list");
  for (const auto& g : goals) {
    if (g.family != goals.front().family) throw InputError("metric: goals must share one family");
  }
  const auto started = std::chrono::steady_clock::now();
  MetricChoice choice;
  std::vector<Path> warm;
  for (const auto& g : goals) {
    warm.push_back(memory.PredictWarmStart(method, g));
    choice.warm_costs.push_back(PathCost(warm.back()));
  }
  for (std::size_t i = 1; i < goals.size(); ++i) {
    if (choice.warm_costs[i] < choice.warm_costs[static_cast<std::size_t>(choice.index)]) {
      choice.index = static_cast<int>(i);
    }
  }
  choice.task = goals[static_cast<std::size_t>(choice.index)];
  choice.warm_start = std::move(warm[static_cast<std::size_t>(choice.index)]);
  choice.prediction_time = Seconds(started);
  return choice;
}

MetricChoice SelectGoalByMetric(const Memory& memory, const std::string& method, const std::vector<Task>& goals,
                                const SolverOptions& options) {
  MetricChoice choice = ChooseGoalByMetric(memory, method, goals);
  choice.result = Solve(ProblemForTask(memory.env_ptr(), choice.task, memory.steps()), choice.warm_start, options);
  return choice;
}

std::string ToString(RaceStatus status) {
  switch (status) {
    case RaceStatus::kWon:
      return "won";
    case RaceStatus::kCancelled:
      return "cancelled";
    case RaceStatus::kInvalid:
      return "invalid";
    case RaceStatus::kLostRace:
      return "lost-race";
  }
  return "?";
}

namespace {

/// The fallback result reported when nobody wins: the least-violating one.
SolveResult LeastViolating(const std::vector<MethodTrace>& traces) {
  const SolveResult* best = nullptr;
  for (const auto& t : traces) {
    if (t.result && (best == nullptr || t.result->max_violation < best->max_violation)) best = &*t.result;
  }
  return best != nullptr ? *best : SolveResult{};
}

SolveResult FailedSolve(const Problem& problem) {
  SolveResult r;
  r.valid = false;
  r.termination = Termination::kMaxIter;
  r.path = Path(problem.env ? problem.env->dof() : 1, problem.steps);
  return r;
}

EnsembleResult RunSerial(const std::vector<EnsembleCandidate>& candidates, const EnsembleOptions& options) {
  EnsembleResult out;
  for (const auto& c : candidates) {
    MethodTrace trace{c.name, RaceStatus::kCancelled, std::nullopt};
    if (!out.success) {
      SolveResult r;
      try {
        r = Solve(c.problem, c.warm_start, options.solver);
      } catch (const SolverError&) {
        r = FailedSolve(c.problem);
      }
      trace.status = r.valid ? RaceStatus::kWon : RaceStatus::kInvalid;
      if (r.valid) {
        out.success = true;
        out.winner = c.name;
        out.result = r;
      }
      trace.result = std::move(r);
    }
    out.traces.push_back(std::move(trace));
  }
  return out;
}

EnsembleResult RunParallel(const std::vector<EnsembleCandidate>& candidates, const EnsembleOptions& options) {
  const int n = static_cast<int>(candidates.size());
  std::stop_source stop;
  std::atomic<int> winner{-1};
  std::mutex mutex;
  std::condition_variable done;
  int finished = 0;
  std::vector<std::optional<SolveResult>> results(static_cast<std::size_t>(n));
  {
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      workers.emplace_back([&, i] {
        const auto& c = candidates[static_cast<std::size_t>(i)];
        SolveResult r;
        try {
          r = Solve(c.problem, c.warm_start, options.solver, stop.get_token());
        } catch (const SolverError&) {
          r = FailedSolve(c.problem);
        }
        if (r.valid) {
          int expected = -1;
          if (winner.compare_exchange_strong(expected, i)) stop.request_stop();
        }
        {
          std::lock_guard lock(mutex);
          results[static_cast<std::size_t>(i)] = std::move(r);
          ++finished;
        }
        done.notify_all();
      });
    }
    std::unique_lock lock(mutex);
    done.wait_for(lock, options.budget, [&] { return finished == n || winner.load() >= 0; });
    lock.unlock();
    stop.request_stop();
  }
  EnsembleResult out;
  const int w = winner.load();
  for (int i = 0; i < n; ++i) {
    MethodTrace trace{candidates[static_cast<std::size_t>(i)].name, RaceStatus::kInvalid,
                      results[static_cast<std::size_t>(i)]};
    const auto& r = *trace.result;
    if (i == w) {
      trace.status = RaceStatus::kWon;
    } else if (r.valid) {
      trace.status = RaceStatus::kLostRace;
    } else if (r.termination == Termination::kCancelled) {
      trace.status = RaceStatus::kCancelled;
    }
    out.traces.push_back(std::move(trace));
  }
  if (w >= 0) {
    out.success = true;
    out.winner = candidates[static_cast<std::size_t>(w)].name;
    out.result = *results[static_cast<std::size_t>(w)];
  }
  return out;
}

}  // namespace

EnsembleResult EnsembleSolve(const std::vector<EnsembleCandidate>& candidates, const EnsembleOptions& options) {
  if (candidates.empty()) throw InputError("ensemble: no candidates");
  const auto started = std::chrono::steady_clock::now();
  EnsembleResult out =
      options.mode == EnsembleMode::kSerial ? RunSerial(candidates, options) : RunParallel(candidates, options);
  if (!out.success) out.result = LeastViolating(out.traces);
  out.wall_time = Seconds(started);
  return out;
}

std::vector<EnsembleCandidate> MakeCandidates(const Memory& memory, const std::vector<std::string>& methods,
                                              const Task& task, const Memory* metric_memory, std::uint64_t seed,
                                              int ik_goals) {
  if (methods.empty()) throw InputError("ensemble: no methods");
  std::vector<EnsembleCandidate> out;
  const Problem direct = ProblemForTask(memory.env_ptr(), task, memory.steps());
  for (const auto& name : methods) {
    if (name == "std") {
      Rng rng = DeriveRng(seed, 1);
      out.push_back({name, direct, StraightLineGuess(memory.env(), memory.spec(), task, memory.steps(), rng)});
      continue;
    }
    if (name.rfind("metric:", 0) == 0) {
      if (metric_memory == nullptr) throw InputError("ensemble: " + name + " needs a metric memory");
      Rng rng = DeriveRng(seed, 0);
      try {
        const auto goals = ExpandCartesianGoal(metric_memory->env(), task, ik_goals, rng);
        MetricChoice choice = ChooseGoalByMetric(*metric_memory, name.substr(7), goals);
        out.push_back({name, ProblemForTask(metric_memory->env_ptr(), choice.task, metric_memory->steps()),
                       std::move(choice.warm_start)});
      } catch (const MetricError&) {
        // No usable IK goal: fall back to the direct Cartesian problem.
        Rng fallback = DeriveRng(seed, 1);
        out.push_back({name, direct, StraightLineGuess(memory.env(), memory.spec(), task, memory.steps(), fallback)});
      }
      continue;
    }
    out.push_back({name, direct, memory.PredictWarmStart(name, task)});
  }
  return out;
}

}  // namespace memmo
