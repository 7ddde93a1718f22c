#include "memmo/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

namespace memmo {

namespace {

double ClampUnit(double s) { return std::clamp(s, 0.0, 1.0); }

double ProjectParam(const Vector2& a, const Vector2& b, const Vector2& p) {
  const Vector2 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 <= 0.0) return 0.0;
  return ClampUnit((p - a).dot(ab) / len2);
}

struct PointSd {
  Vector2 p;
  double operator()(const Circle& c) const { return (p - c.center).norm() - c.radius; }
  double operator()(const Box& b) const {
    const Vector2 d = (b.lo - p).cwiseMax(p - b.hi);
    const double outside = d.cwiseMax(0.0).norm();
    const double inside = std::min(d.maxCoeff(), 0.0);
    return outside + inside;
  }
};

struct SegmentSd {
  Vector2 a;
  Vector2 b;
  double operator()(const Circle& c) const {
    const double s = ProjectParam(a, b, c.center);
    return (a + s * (b - a) - c.center).norm() - c.radius;
  }
  double operator()(const Box& box) const {
    // Candidate parameters: segment ends, projections of the four corners, and
    // crossings of the four face functions. The minimum of the (convex) signed
    // distance along the segment is attained at one of them.
    const Obstacle obstacle = box;
    const Vector2 ab = b - a;
    auto value = [&](double s) { return PointSignedDistance(obstacle, a + s * ab); };
    double best = std::min(value(0.0), value(1.0));
    const std::array<Vector2, 4> corners = {box.lo, Vector2(box.hi.x(), box.lo.y()), box.hi,
                                            Vector2(box.lo.x(), box.hi.y())};
    for (const Vector2& c : corners) best = std::min(best, value(ProjectParam(a, b, c)));
    // face functions f_i(s) = f_i(a) + s * slope_i
    const std::array<double, 4> f0 = {box.lo.x() - a.x(), a.x() - box.hi.x(), box.lo.y() - a.y(),
                                      a.y() - box.hi.y()};
    const std::array<double, 4> slope = {-ab.x(), ab.x(), -ab.y(), ab.y()};
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        const double ds = slope[j] - slope[i];
        if (std::abs(ds) < 1e-15) continue;
        best = std::min(best, value(ClampUnit((f0[i] - f0[j]) / ds)));
      }
    }
    return best;
  }
};

std::vector<double> CumulativeAngles(const Eigen::Ref<const Vector>& q) {
  std::vector<double> theta(static_cast<std::size_t>(q.size()));
  double acc = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    acc += q[i];
    theta[static_cast<std::size_t>(i)] = acc;
  }
  return theta;
}

void RequireDim(const Environment& env, const Eigen::Ref<const Vector>& q, const char* what) {
  if (q.size() != env.dof()) {
    throw InputError(std::string(what) + ": configuration has dimension " +
                     std::to_string(q.size()) + ", environment expects " +
                     std::to_string(env.dof()));
  }
}

Obstacle ObstacleFromJson(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "circle") {
    const auto c = j.at("center").get<std::array<double, 2>>();
    return Circle{Vector2(c[0], c[1]), j.at("radius").get<double>()};
  }
  if (type == "box") {
    const auto lo = j.at("min").get<std::array<double, 2>>();
    const auto hi = j.at("max").get<std::array<double, 2>>();
    return Box{Vector2(lo[0], lo[1]), Vector2(hi[0], hi[1])};
  }
  throw ConfigError("unknown obstacle type '" + type + "'");
}

nlohmann::json ObstacleToJson(const Obstacle& o) {
  if (const auto* c = std::get_if<Circle>(&o)) {
    return {{"type", "circle"}, {"center", {c->center.x(), c->center.y()}}, {"radius", c->radius}};
  }
  const auto& b = std::get<Box>(o);
  return {{"type", "box"}, {"min", {b.lo.x(), b.lo.y()}}, {"max", {b.hi.x(), b.hi.y()}}};
}

double Cross(const Vector2& a, const Vector2& b) { return a.x() * b.y() - a.y() * b.x(); }

double PointSegmentDistance(const Vector2& p, const Vector2& a, const Vector2& b) {
  return (a + ProjectParam(a, b, p) * (b - a) - p).norm();
}

/// Signed distance from a point to a convex polygon (negative inside).
double PointPolygonSignedDistance(const Vector2& p, const std::vector<Vector2>& poly) {
  if (poly.size() == 1) return (p - poly[0]).norm();
  if (poly.size() == 2) return PointSegmentDistance(p, poly[0], poly[1]);
  double dist = std::numeric_limits<double>::infinity();
  bool inside = true;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vector2& a = poly[i];
    const Vector2& b = poly[(i + 1) % poly.size()];
    if (Cross(b - a, p - a) < 0.0) inside = false;
    dist = std::min(dist, PointSegmentDistance(p, a, b));
  }
  return inside ? -dist : dist;
}

std::vector<Vector2> EdgeNormals(const std::vector<Vector2>& poly) {
  std::vector<Vector2> normals;
  if (poly.size() < 2) return normals;
  const std::size_t edges = poly.size() == 2 ? 1 : poly.size();
  for (std::size_t i = 0; i < edges; ++i) {
    const Vector2 e = poly[(i + 1) % poly.size()] - poly[i];
    const double len = e.norm();
    if (len > 0.0) normals.emplace_back(-e.y() / len, e.x() / len);
  }
  return normals;
}

/// Convex polygon vs convex polygon. Disjoint: closest vertex-edge pair.
/// Overlapping: smallest projected overlap over all edge normals (2-D SAT).
double PolygonPolygonSignedDistance(const std::vector<Vector2>& a, const std::vector<Vector2>& b) {
  double depth = std::numeric_limits<double>::infinity();
  bool separated = false;
  auto axes = EdgeNormals(a);
  const auto axes_b = EdgeNormals(b);
  axes.insert(axes.end(), axes_b.begin(), axes_b.end());
  for (const Vector2& n : axes) {
    double min_a = std::numeric_limits<double>::infinity(), max_a = -min_a;
    double min_b = min_a, max_b = -min_a;
    for (const auto& v : a) {
      min_a = std::min(min_a, n.dot(v));
      max_a = std::max(max_a, n.dot(v));
    }
    for (const auto& v : b) {
      min_b = std::min(min_b, n.dot(v));
      max_b = std::max(max_b, n.dot(v));
    }
    const double overlap = std::min(max_a - min_b, max_b - min_a);
    if (overlap < 0.0) {
      separated = true;
      break;
    }
    depth = std::min(depth, overlap);
  }
  if (!separated) return -depth;
  double dist = std::numeric_limits<double>::infinity();
  auto vertex_edges = [&dist](const std::vector<Vector2>& verts, const std::vector<Vector2>& poly) {
    if (poly.size() == 1) {
      for (const auto& v : verts) dist = std::min(dist, (v - poly[0]).norm());
      return;
    }
    const std::size_t edges = poly.size() == 2 ? 1 : poly.size();
    for (const auto& v : verts) {
      for (std::size_t i = 0; i < edges; ++i) {
        dist = std::min(dist, PointSegmentDistance(v, poly[i], poly[(i + 1) % poly.size()]));
      }
    }
  };
  vertex_edges(a, b);
  vertex_edges(b, a);
  return dist;
}

std::vector<Vector2> BoxPolygon(const Box& box) {
  return {box.lo, Vector2(box.hi.x(), box.lo.y()), box.hi, Vector2(box.lo.x(), box.hi.y())};
}

}  // namespace

double PointSignedDistance(const Obstacle& obstacle, const Vector2& p) {
  return std::visit(PointSd{p}, obstacle);
}

double SegmentSignedDistance(const Obstacle& obstacle, const Vector2& a, const Vector2& b) {
  return std::visit(SegmentSd{a, b}, obstacle);
}

std::vector<Vector2> ConvexHull(std::vector<Vector2> points) {
  std::sort(points.begin(), points.end(), [](const Vector2& a, const Vector2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() <= 1) return points;
  // Andrew's monotone chain; near-collinear turns are dropped.
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, (p - points.front()).norm());
  const double eps = 1e-12 * scale * scale;
  std::vector<Vector2> hull(2 * points.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    while (k >= 2 && Cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= eps) --k;
    hull[k++] = points[i];
  }
  for (std::size_t i = points.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && Cross(hull[k - 1] - hull[k - 2], points[i] - hull[k - 2]) <= eps) --k;
    hull[k++] = points[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 2) return {points.front(), points.back()};
  return hull;
}

double ConvexSignedDistance(const std::vector<Vector2>& hull, const Obstacle& obstacle) {
  if (hull.empty()) throw InputError("ConvexSignedDistance: empty polygon");
  if (const auto* c = std::get_if<Circle>(&obstacle)) {
    return PointPolygonSignedDistance(c->center, hull) - c->radius;
  }
  return PolygonPolygonSignedDistance(hull, BoxPolygon(std::get<Box>(obstacle)));
}

Environment Environment::Base2d(std::string id, std::vector<Obstacle> obstacles,
                                double footprint_radius, std::vector<JointLimit> limits,
                                double clearance) {
  Environment env;
  env.id_ = std::move(id);
  env.kind_ = EnvKind::kBase2d;
  env.obstacles_ = std::move(obstacles);
  env.footprint_radius_ = footprint_radius;
  env.limits_ = std::move(limits);
  env.clearance_ = clearance;
  env.Validate();
  return env;
}

Environment Environment::Arm(std::string id, std::vector<double> link_lengths,
                             std::vector<Obstacle> obstacles, std::vector<JointLimit> limits,
                             double clearance, Vector2 arm_base) {
  Environment env;
  env.id_ = std::move(id);
  env.kind_ = EnvKind::kArm;
  env.link_lengths_ = std::move(link_lengths);
  env.obstacles_ = std::move(obstacles);
  env.limits_ = std::move(limits);
  env.clearance_ = clearance;
  env.arm_base_ = arm_base;
  env.Validate();
  return env;
}

void Environment::Validate() const {
  if (kind_ == EnvKind::kBase2d) {
    if (limits_.size() != 3) throw InputError("base2d environment needs exactly 3 joint limits");
    if (footprint_radius_ < 0.0) throw InputError("footprint radius must be non-negative");
  } else {
    if (link_lengths_.empty()) throw InputError("arm environment needs at least one link");
    if (link_lengths_.size() != limits_.size()) {
      throw InputError("arm environment: one joint limit per link required");
    }
    for (double l : link_lengths_) {
      if (!(l > 0.0)) throw InputError("link lengths must be strictly positive");
    }
  }
  for (const auto& lim : limits_) {
    if (!(lim.lo <= lim.hi)) throw InputError("joint limit lo must not exceed hi");
  }
  for (const auto& o : obstacles_) {
    if (const auto* c = std::get_if<Circle>(&o)) {
      if (!(c->radius > 0.0)) throw InputError("circle radius must be positive");
    } else {
      const auto& b = std::get<Box>(o);
      if (!(b.lo.x() < b.hi.x() && b.lo.y() < b.hi.y())) {
        throw InputError("box min corner must be below max corner");
      }
    }
  }
  if (clearance_ < 0.0) throw InputError("clearance must be non-negative");
}

double Environment::reach() const {
  return std::accumulate(link_lengths_.begin(), link_lengths_.end(), 0.0);
}

bool Environment::WithinLimits(const Eigen::Ref<const Vector>& q, double slack) const {
  for (int i = 0; i < dof(); ++i) {
    const auto& lim = limits_[static_cast<std::size_t>(i)];
    if (q[i] < lim.lo - slack || q[i] > lim.hi + slack) return false;
  }
  return true;
}

Environment EnvironmentFromJson(const nlohmann::json& doc) {
  try {
    const std::string kind = doc.at("kind").get<std::string>();
    const std::string id = doc.value("id", kind);
    const double clearance = doc.value("clearance", 0.02);
    std::vector<Obstacle> obstacles;
    for (const auto& o : doc.value("obstacles", nlohmann::json::array())) {
      obstacles.push_back(ObstacleFromJson(o));
    }
    std::vector<JointLimit> limits;
    for (const auto& l : doc.at("joint_limits")) {
      const auto pair = l.get<std::array<double, 2>>();
      limits.push_back({pair[0], pair[1]});
    }
    if (doc.contains("dof") && doc.at("dof").get<int>() != static_cast<int>(limits.size())) {
      throw ConfigError("environment 'dof' disagrees with the joint limit count");
    }
    if (kind == "base2d") {
      return Environment::Base2d(id, std::move(obstacles), doc.at("footprint_radius").get<double>(),
                                 std::move(limits), clearance);
    }
    if (kind == "arm") {
      Vector2 base = Vector2::Zero();
      if (doc.contains("base")) {
        const auto b = doc.at("base").get<std::array<double, 2>>();
        base = Vector2(b[0], b[1]);
      }
      return Environment::Arm(id, doc.at("link_lengths").get<std::vector<double>>(),
                              std::move(obstacles), std::move(limits), clearance, base);
    }
    throw ConfigError("unknown environment kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed environment document: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("invalid environment: ") + e.what());
  }
}

nlohmann::json EnvironmentToJson(const Environment& env) {
  nlohmann::json doc;
  doc["id"] = env.id();
  doc["kind"] = env.kind() == EnvKind::kBase2d ? "base2d" : "arm";
  doc["dof"] = env.dof();
  doc["clearance"] = env.clearance();
  doc["joint_limits"] = nlohmann::json::array();
  for (const auto& l : env.limits()) doc["joint_limits"].push_back({l.lo, l.hi});
  doc["obstacles"] = nlohmann::json::array();
  for (const auto& o : env.obstacles()) doc["obstacles"].push_back(ObstacleToJson(o));
  if (env.kind() == EnvKind::kBase2d) {
    doc["footprint_radius"] = env.footprint_radius();
  } else {
    doc["link_lengths"] = env.link_lengths();
    doc["base"] = {env.arm_base().x(), env.arm_base().y()};
  }
  return doc;
}

Environment LoadEnvironment(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open environment file " + file.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("cannot parse " + file.string() + ": " + e.what());
  }
  return EnvironmentFromJson(doc);
}

double SignedDistance(const Environment& env, const Eigen::Ref<const Vector>& q) {
  RequireDim(env, q, "SignedDistance");
  if (env.obstacles().empty()) return kNoObstacleDistance;
  double best = std::numeric_limits<double>::infinity();
  if (env.kind() == EnvKind::kBase2d) {
    const Vector2 p(q[0], q[1]);
    for (const auto& o : env.obstacles()) best = std::min(best, PointSignedDistance(o, p));
    return best - env.footprint_radius() - env.clearance();
  }
  const ChainPositions chain = ForwardKinematics(env, q);
  const std::size_t links = env.link_lengths().size();
  for (std::size_t i = 0; i < links; ++i) {
    const Vector2& a = chain.joints[i];
    const Vector2& b = i + 1 < links ? chain.joints[i + 1] : chain.tip;
    for (const auto& o : env.obstacles()) best = std::min(best, SegmentSignedDistance(o, a, b));
  }
  return best - env.clearance();
}

double SweptSignedDistance(const Environment& env, const Eigen::Ref<const Vector>& q_a,
                           const Eigen::Ref<const Vector>& q_b) {
  RequireDim(env, q_a, "SweptSignedDistance");
  RequireDim(env, q_b, "SweptSignedDistance");
  if (env.obstacles().empty()) return kNoObstacleDistance;
  double best = std::numeric_limits<double>::infinity();
  if (env.kind() == EnvKind::kBase2d) {
    const Vector2 a(q_a[0], q_a[1]);
    const Vector2 b(q_b[0], q_b[1]);
    for (const auto& o : env.obstacles()) best = std::min(best, SegmentSignedDistance(o, a, b));
    return best - env.footprint_radius() - env.clearance();
  }
  const ChainPositions ca = ForwardKinematics(env, q_a);
  const ChainPositions cb = ForwardKinematics(env, q_b);
  const std::size_t links = env.link_lengths().size();
  for (std::size_t i = 0; i < links; ++i) {
    const Vector2& a0 = ca.joints[i];
    const Vector2& a1 = i + 1 < links ? ca.joints[i + 1] : ca.tip;
    const Vector2& b0 = cb.joints[i];
    const Vector2& b1 = i + 1 < links ? cb.joints[i + 1] : cb.tip;
    const auto hull = ConvexHull({a0, a1, b0, b1});
    for (const auto& o : env.obstacles()) best = std::min(best, ConvexSignedDistance(hull, o));
  }
  return best - env.clearance();
}

ChainPositions ForwardKinematics(const Environment& env, const Eigen::Ref<const Vector>& q) {
  if (env.kind() != EnvKind::kArm) throw InputError("ForwardKinematics requires an arm environment");
  RequireDim(env, q, "ForwardKinematics");
  const auto theta = CumulativeAngles(q);
  ChainPositions out;
  out.joints.reserve(theta.size());
  Vector2 p = env.arm_base();
  for (std::size_t i = 0; i < theta.size(); ++i) {
    out.joints.push_back(p);
    p += env.link_lengths()[i] * Vector2(std::cos(theta[i]), std::sin(theta[i]));
  }
  out.tip = p;
  return out;
}

Eigen::Matrix<double, 2, Eigen::Dynamic> TipJacobian(const Environment& env,
                                                     const Eigen::Ref<const Vector>& q) {
  if (env.kind() != EnvKind::kArm) throw InputError("TipJacobian requires an arm environment");
  RequireDim(env, q, "TipJacobian");
  const auto theta = CumulativeAngles(q);
  const int n = env.dof();
  Eigen::Matrix<double, 2, Eigen::Dynamic> jac(2, n);
  Vector2 acc = Vector2::Zero();
  for (int j = n - 1; j >= 0; --j) {
    const double l = env.link_lengths()[static_cast<std::size_t>(j)];
    const double t = theta[static_cast<std::size_t>(j)];
    acc += l * Vector2(-std::sin(t), std::cos(t));
    jac.col(j) = acc;
  }
  return jac;
}

IkResult InverseKinematics(const Environment& env, const Vector2& target, int count, Rng& rng,
                           const IkOptions& options) {
  if (env.kind() != EnvKind::kArm) throw InputError("InverseKinematics requires an arm environment");
  if (count < 1) throw InputError("InverseKinematics: count must be at least 1");
  IkResult result;
  if ((target - env.arm_base()).norm() > env.reach()) {
    result.unreachable = true;
    return result;
  }
  const int n = env.dof();
  const double lambda2 = options.damping * options.damping;
  auto clamp = [&](Vector& q) {
    for (int i = 0; i < n; ++i) {
      const auto& lim = env.limits()[static_cast<std::size_t>(i)];
      q[i] = std::clamp(q[i], lim.lo, lim.hi);
    }
  };
  auto tip_error = [&](const Vector& q) -> Vector2 { return target - ForwardKinematics(env, q).tip; };

  for (int seed = 0; seed < count; ++seed) {
    Vector q(n);
    for (int i = 0; i < n; ++i) {
      const auto& lim = env.limits()[static_cast<std::size_t>(i)];
      q[i] = std::uniform_real_distribution<double>(lim.lo, lim.hi)(rng);
    }
    Vector2 e = tip_error(q);
    for (int it = 0; it < options.max_iterations && e.norm() > 1e-12; ++it) {
      const auto jac = TipJacobian(env, q);
      const Eigen::Matrix2d jjt = jac * jac.transpose();
      if (e.norm() > options.tolerance) {
        // damped step
        q += jac.transpose() * (jjt + lambda2 * Eigen::Matrix2d::Identity()).ldlt().solve(e);
        clamp(q);
        e = tip_error(q);
        continue;
      }
      // Inside the tolerance: undamped Gauss-Newton polish so that solutions on
      // the same branch land on the same point and deduplicate cleanly.
      const Vector step =
          jac.transpose() * (jjt + 1e-12 * Eigen::Matrix2d::Identity()).ldlt().solve(e);
      double alpha = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 20; ++ls, alpha *= 0.5) {
        Vector trial = q + alpha * step;
        clamp(trial);
        const Vector2 e_trial = tip_error(trial);
        if (e_trial.norm() < e.norm()) {
          q = trial;
          e = e_trial;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    if (e.norm() > options.tolerance) continue;
    const bool duplicate = std::any_of(
        result.solutions.begin(), result.solutions.end(), [&](const Configuration& s) {
          return (s - q).cwiseAbs().maxCoeff() < options.dedup_distance;
        });
    if (!duplicate) result.solutions.push_back(q);
  }
  return result;
}

Path StraightLinePath(const Eigen::Ref<const Vector>& q_init, const Eigen::Ref<const Vector>& q_goal,
                      int steps, std::span<const Waypoint> via) {
  if (steps < 1) throw InputError("StraightLinePath: steps must be at least 1");
  if (q_init.size() != q_goal.size()) throw InputError("StraightLinePath: endpoint dimension mismatch");
  std::vector<Vector> anchors;
  anchors.emplace_back(q_init);
  for (const auto& w : via) {
    if (w.config.size() != q_init.size()) throw InputError("StraightLinePath: waypoint dimension mismatch");
    anchors.push_back(w.config);
  }
  anchors.emplace_back(q_goal);
  const std::size_t segments = anchors.size() - 1;
  if (static_cast<std::size_t>(steps) < segments) {
    throw InputError("StraightLinePath: fewer steps than segments");
  }

  std::vector<double> chord(segments);
  for (std::size_t i = 0; i < segments; ++i) chord[i] = (anchors[i + 1] - anchors[i]).norm();
  const double total = std::accumulate(chord.begin(), chord.end(), 0.0);

  // Largest-remainder apportioning; ties favour the earlier segment.
  std::vector<int> alloc(segments, 0);
  std::vector<double> remainder(segments, 0.0);
  int used = 0;
  for (std::size_t i = 0; i < segments; ++i) {
    const double share = total > 0.0 ? steps * chord[i] / total
                                     : static_cast<double>(steps) / static_cast<double>(segments);
    alloc[i] = static_cast<int>(std::floor(share + 1e-12));
    remainder[i] = share - alloc[i];
    used += alloc[i];
  }
  std::vector<std::size_t> order(segments);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b] + 1e-12; });
  for (std::size_t k = 0; used < steps; k = (k + 1) % segments, ++used) ++alloc[order[k]];
  for (std::size_t i = 0; i < segments; ++i) {
    if (alloc[i] > 0) continue;
    // Borrow from the largest allocation, preferring later segments.
    std::size_t donor = 0;
    for (std::size_t j = 0; j < segments; ++j) {
      if (alloc[j] >= alloc[donor]) donor = j;
    }
    --alloc[donor];
    alloc[i] = 1;
  }

  Path path(static_cast<int>(q_init.size()), steps);
  int t = 0;
  for (std::size_t i = 0; i < segments; ++i) {
    for (int k = 0; k < alloc[i]; ++k, ++t) {
      const double s = static_cast<double>(k) / alloc[i];
      path.at(t) = anchors[i] + s * (anchors[i + 1] - anchors[i]);
    }
  }
  path.at(steps) = anchors.back();
  return path;
}

}  // namespace memmo
