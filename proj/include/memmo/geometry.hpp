#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "memmo/common.hpp"
#include "memmo/path.hpp"

namespace memmo {

struct Circle {
  Vector2 center;
  double radius = 0.0;
};

/// Axis-aligned rectangle.
struct Box {
  Vector2 lo;
  Vector2 hi;
};

using Obstacle = std::variant<Circle, Box>;

/// Signed distance from a point to an obstacle (negative inside).
double PointSignedDistance(const Obstacle& obstacle, const Vector2& p);

/// Minimum of PointSignedDistance over the segment [a, b]. Exact for both shapes.
double SegmentSignedDistance(const Obstacle& obstacle, const Vector2& a, const Vector2& b);

/// Convex hull (counter-clockwise) of a small point set; collinear input
/// collapses to its two extreme points, coincident input to one point.
std::vector<Vector2> ConvexHull(std::vector<Vector2> points);

/// Signed distance between a convex polygon (as returned by ConvexHull) and an
/// obstacle: separation distance when disjoint, minus the penetration depth otherwise.
double ConvexSignedDistance(const std::vector<Vector2>& hull, const Obstacle& obstacle);

enum class EnvKind { kBase2d, kArm };

struct JointLimit {
  double lo = 0.0;
  double hi = 0.0;
};

/// Returned by SignedDistance when the scene has no obstacles.
inline constexpr double kNoObstacleDistance = 1e9;

/// Planar scene: either an SE(2) disc base among obstacles or a planar serial
/// arm anchored at `arm_base`. Immutable after construction.
class Environment {
 public:
  static Environment Base2d(std::string id, std::vector<Obstacle> obstacles,
                            double footprint_radius, std::vector<JointLimit> limits,
                            double clearance = 0.02);
  static Environment Arm(std::string id, std::vector<double> link_lengths,
                         std::vector<Obstacle> obstacles, std::vector<JointLimit> limits,
                         double clearance = 0.02, Vector2 arm_base = Vector2::Zero());

  const std::string& id() const { return id_; }
  EnvKind kind() const { return kind_; }
  int dof() const { return static_cast<int>(limits_.size()); }
  const std::vector<Obstacle>& obstacles() const { return obstacles_; }
  const std::vector<JointLimit>& limits() const { return limits_; }
  const std::vector<double>& link_lengths() const { return link_lengths_; }
  double footprint_radius() const { return footprint_radius_; }
  double clearance() const { return clearance_; }
  const Vector2& arm_base() const { return arm_base_; }
  double reach() const;

  bool WithinLimits(const Eigen::Ref<const Vector>& q, double slack = 0.0) const;

 private:
  Environment() = default;
  void Validate() const;

  std::string id_;
  EnvKind kind_ = EnvKind::kBase2d;
  std::vector<Obstacle> obstacles_;
  std::vector<JointLimit> limits_;
  std::vector<double> link_lengths_;
  double footprint_radius_ = 0.0;
  double clearance_ = 0.02;
  Vector2 arm_base_ = Vector2::Zero();
};

using EnvironmentPtr = std::shared_ptr<const Environment>;

Environment EnvironmentFromJson(const nlohmann::json& doc);
nlohmann::json EnvironmentToJson(const Environment& env);
Environment LoadEnvironment(const std::filesystem::path& file);

/// Minimum over robot bodies and obstacles of (distance - clearance), with the
/// disc footprint subtracted for base2d. Negative means the clearance band is violated.
double SignedDistance(const Environment& env, const Eigen::Ref<const Vector>& q);

struct ChainPositions {
  /// joints[0] is the arm base; joints[i] is the start of link i.
  std::vector<Vector2> joints;
  Vector2 tip;
};

/// Signed distance of the region swept while moving linearly from q_a to q_b,
/// approximated per body by the convex hull of its two placements. Never exceeds
/// min(SignedDistance(q_a), SignedDistance(q_b)).
double SweptSignedDistance(const Environment& env, const Eigen::Ref<const Vector>& q_a,
                           const Eigen::Ref<const Vector>& q_b);

ChainPositions ForwardKinematics(const Environment& env, const Eigen::Ref<const Vector>& q);

/// d tip / d q, a 2 x D matrix.
Eigen::Matrix<double, 2, Eigen::Dynamic> TipJacobian(const Environment& env,
                                                     const Eigen::Ref<const Vector>& q);

struct IkResult {
  std::vector<Configuration> solutions;
  bool unreachable = false;
};

struct IkOptions {
  double damping = 0.1;
  int max_iterations = 200;
  double tolerance = 1e-3;
  double dedup_distance = 1e-2;
};

/// Damped least squares from `count` random seeds within the joint limits.
IkResult InverseKinematics(const Environment& env, const Vector2& target, int count, Rng& rng,
                           const IkOptions& options = {});

struct Waypoint {
  Configuration config;
  std::string label;
};

/// Piecewise-linear path through optional waypoints. Steps are apportioned to
/// segments in proportion to chord length (at least one per segment).
Path StraightLinePath(const Eigen::Ref<const Vector>& q_init, const Eigen::Ref<const Vector>& q_goal,
                      int steps, std::span<const Waypoint> via = {});

}  // namespace memmo
