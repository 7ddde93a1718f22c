#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memmo/common.hpp"
#include "memmo/geometry.hpp"

namespace memmo {

enum class TaskFamily {
  kCfgToCfg,        ///< x = (q_init, q_goal)
  kFixedInitToCfg,  ///< x = q_goal, q_init is a declared constant
  kCfgToCartesian,  ///< x = Cartesian tip goal, q_init is a declared constant
};

std::string ToString(TaskFamily family);
TaskFamily TaskFamilyFromString(const std::string& name);

/// A planning query.
struct Task {
  TaskFamily family = TaskFamily::kCfgToCfg;
  Configuration q_init;
  Configuration q_goal;  ///< empty for the Cartesian family
  Vector2 cartesian_goal = Vector2::Zero();

  bool has_configuration_goal() const { return family != TaskFamily::kCfgToCartesian; }

  /// The flat regressor input x.
  Vector Descriptor() const;
};

/// Inverse of Task::Descriptor. `fixed_init` is required by the fixed-init families.
Task TaskFromDescriptor(TaskFamily family, const Eigen::Ref<const Vector>& descriptor, int dof,
                        const Configuration& fixed_init);

enum class WaypointMode {
  kNone,    ///< plain straight line
  kFirst,   ///< always through the first declared waypoint
  kRandom,  ///< one declared waypoint chosen uniformly per sample
};

/// Uniform task distribution plus the initial-guess policy used while building a memory.
struct TaskSpec {
  TaskFamily family = TaskFamily::kCfgToCfg;
  Configuration fixed_init;  ///< used by the fixed-init and Cartesian families
  Vector init_lo, init_hi;   ///< cfg-to-cfg only
  Vector goal_lo, goal_hi;   ///< configuration box, or 2-D Cartesian box
  std::vector<Waypoint> waypoints;
  WaypointMode waypoint_mode = WaypointMode::kNone;
  int max_retries = 1000;

  int descriptor_dim(int dof) const;
  void Validate(const Environment& env) const;
};

TaskSpec TaskSpecFromJson(const nlohmann::json& doc);
nlohmann::json TaskSpecToJson(const TaskSpec& spec);

/// Draws a task uniformly from the task spec's box, resampling until the
/// configuration components are collision-free (and Cartesian goals reachable).
Task SampleTask(const Environment& env, const TaskSpec& spec, Rng& rng);

/// Waypoints for one straight-line initial guess under the task spec's policy.
std::vector<Waypoint> ChooseWaypoints(const TaskSpec& spec, Rng& rng);

}  // namespace memmo
