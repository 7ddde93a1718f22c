#include "memmo/task.hpp"

namespace memmo {

namespace {

Vector VectorFromJson(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

nlohmann::json VectorToJson(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double Uniform(double lo, double hi, Rng& rng) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector SampleBox(const Vector& lo, const Vector& hi, Rng& rng) {
  Vector out(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) out[i] = Uniform(lo[i], hi[i], rng);
  return out;
}

void RequireBox(const Vector& lo, const Vector& hi, Eigen::Index dim, const char* what) {
  if (lo.size() != dim || hi.size() != dim) {
    throw InputError(std::string(what) + ": box has wrong dimension");
  }
  if ((lo.array() > hi.array()).any()) throw InputError(std::string(what) + ": box lo exceeds hi");
}

}  // namespace

std::string ToString(TaskFamily family) {
  switch (family) {
    case TaskFamily::kCfgToCfg:
      return "cfg-to-cfg";
    case TaskFamily::kFixedInitToCfg:
      return "fixed-init-to-cfg";
    case TaskFamily::kCfgToCartesian:
      return "cfg-to-cartesian";
  }
  return "?";
}

TaskFamily TaskFamilyFromString(const std::string& name) {
  if (name == "cfg-to-cfg") return TaskFamily::kCfgToCfg;
  if (name == "fixed-init-to-cfg") return TaskFamily::kFixedInitToCfg;
  if (name == "cfg-to-cartesian") return TaskFamily::kCfgToCartesian;
  throw ConfigError("unknown task family '" + name + "'");
}

Vector Task::Descriptor() const {
  switch (family) {
    case TaskFamily::kCfgToCfg: {
      Vector x(q_init.size() + q_goal.size());
      x << q_init, q_goal;
      return x;
    }
    case TaskFamily::kFixedInitToCfg:
      return q_goal;
    case TaskFamily::kCfgToCartesian:
      return cartesian_goal;
  }
  return {};
}

Task TaskFromDescriptor(TaskFamily family, const Eigen::Ref<const Vector>& descriptor, int dof,
                        const Configuration& fixed_init) {
  Task task;
  task.family = family;
  switch (family) {
    case TaskFamily::kCfgToCfg:
      if (descriptor.size() != 2 * dof) throw InputError("descriptor must have length 2*dof");
      task.q_init = descriptor.head(dof);
      task.q_goal = descriptor.tail(dof);
      break;
    case TaskFamily::kFixedInitToCfg:
      if (descriptor.size() != dof) throw InputError("descriptor must have length dof");
      task.q_init = fixed_init;
      task.q_goal = descriptor;
      break;
    case TaskFamily::kCfgToCartesian:
      if (descriptor.size() != 2) throw InputError("Cartesian descriptor must have length 2");
      task.q_init = fixed_init;
      task.cartesian_goal = descriptor;
      break;
  }
  if (task.q_init.size() != dof) throw InputError("fixed initial configuration has wrong dimension");
  return task;
}

int TaskSpec::descriptor_dim(int dof) const {
  switch (family) {
    case TaskFamily::kCfgToCfg:
      return 2 * dof;
    case TaskFamily::kFixedInitToCfg:
      return dof;
    case TaskFamily::kCfgToCartesian:
      return 2;
  }
  return 0;
}

void TaskSpec::Validate(const Environment& env) const {
  const int dof = env.dof();
  if (family == TaskFamily::kCfgToCfg) {
    RequireBox(init_lo, init_hi, dof, "init box");
  } else if (fixed_init.size() != dof) {
    throw InputError("fixed_init must have the environment's dimension");
  }
  if (family == TaskFamily::kCfgToCartesian) {
    if (env.kind() != EnvKind::kArm) throw InputError("Cartesian tasks need an arm environment");
    RequireBox(goal_lo, goal_hi, 2, "Cartesian goal box");
  } else {
    RequireBox(goal_lo, goal_hi, dof, "goal box");
  }
  for (const auto& w : waypoints) {
    if (w.config.size() != dof) throw InputError("waypoint dimension mismatch");
  }
  if (waypoint_mode != WaypointMode::kNone && waypoints.empty()) {
    throw InputError("waypoint mode requires at least one waypoint");
  }
  if (max_retries < 1) throw InputError("max_retries must be positive");
}

TaskSpec TaskSpecFromJson(const nlohmann::json& doc) {
  try {
    TaskSpec spec;
    spec.family = TaskFamilyFromString(doc.at("family").get<std::string>());
    if (doc.contains("fixed_init")) spec.fixed_init = VectorFromJson(doc.at("fixed_init"));
    if (doc.contains("init_box")) {
      spec.init_lo = VectorFromJson(doc.at("init_box").at("lo"));
      spec.init_hi = VectorFromJson(doc.at("init_box").at("hi"));
    }
    spec.goal_lo = VectorFromJson(doc.at("goal_box").at("lo"));
    spec.goal_hi = VectorFromJson(doc.at("goal_box").at("hi"));
    for (const auto& w : doc.value("waypoints", nlohmann::json::array())) {
      spec.waypoints.push_back({VectorFromJson(w.at("config")), w.value("label", "")});
    }
    const std::string mode = doc.value("waypoint_mode", "none");
    if (mode == "none") {
      spec.waypoint_mode = WaypointMode::kNone;
    } else if (mode == "first") {
      spec.waypoint_mode = WaypointMode::kFirst;
    } else if (mode == "random") {
      spec.waypoint_mode = WaypointMode::kRandom;
    } else {
      throw ConfigError("unknown waypoint_mode '" + mode + "'");
    }
    spec.max_retries = doc.value("max_retries", 1000);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed task spec: ") + e.what());
  }
}

nlohmann::json TaskSpecToJson(const TaskSpec& spec) {
  nlohmann::json doc;
  doc["family"] = ToString(spec.family);
  if (spec.fixed_init.size() > 0) doc["fixed_init"] = VectorToJson(spec.fixed_init);
  if (spec.init_lo.size() > 0) {
    doc["init_box"] = {{"lo", VectorToJson(spec.init_lo)}, {"hi", VectorToJson(spec.init_hi)}};
  }
  doc["goal_box"] = {{"lo", VectorToJson(spec.goal_lo)}, {"hi", VectorToJson(spec.goal_hi)}};
  doc["waypoints"] = nlohmann::json::array();
  for (const auto& w : spec.waypoints) {
    doc["waypoints"].push_back({{"config", VectorToJson(w.config)}, {"label", w.label}});
  }
  switch (spec.waypoint_mode) {
    case WaypointMode::kNone:
      doc["waypoint_mode"] = "none";
      break;
    case WaypointMode::kFirst:
      doc["waypoint_mode"] = "first";
      break;
    case WaypointMode::kRandom:
      doc["waypoint_mode"] = "random";
      break;
  }
  doc["max_retries"] = spec.max_retries;
  return doc;
}

Task SampleTask(const Environment& env, const TaskSpec& spec, Rng& rng) {
  spec.Validate(env);
  for (int attempt = 0; attempt < spec.max_retries; ++attempt) {
    Task task;
    task.family = spec.family;
    task.q_init = spec.family == TaskFamily::kCfgToCfg ? SampleBox(spec.init_lo, spec.init_hi, rng)
                                                       : spec.fixed_init;
    if (spec.family == TaskFamily::kCfgToCartesian) {
      task.cartesian_goal = SampleBox(spec.goal_lo, spec.goal_hi, rng);
      if ((task.cartesian_goal - env.arm_base()).norm() > env.reach()) continue;
    } else {
      task.q_goal = SampleBox(spec.goal_lo, spec.goal_hi, rng);
      if (SignedDistance(env, task.q_goal) < 0.0) continue;
    }
    if (spec.family == TaskFamily::kCfgToCfg && SignedDistance(env, task.q_init) < 0.0) continue;
    return task;
  }
  throw SamplingError("SampleTask: no collision-free task after " +
                      std::to_string(spec.max_retries) + " draws");
}

std::vector<Waypoint> ChooseWaypoints(const TaskSpec& spec, Rng& rng) {
  switch (spec.waypoint_mode) {
    case WaypointMode::kNone:
      return {};
    case WaypointMode::kFirst:
      return {spec.waypoints.front()};
    case WaypointMode::kRandom: {
      std::uniform_int_distribution<std::size_t> pick(0, spec.waypoints.size() - 1);
      return {spec.waypoints[pick(rng)]};
    }
  }
  return {};
}

}  // namespace memmo
