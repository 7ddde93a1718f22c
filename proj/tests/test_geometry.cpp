#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "memmo/geometry.hpp"

using namespace memmo;
using namespace memmo::testing;

namespace {

Environment CircleBase(double footprint) {
  return Environment::Base2d("circle", {Circle{Vector2(0, 0), 0.5}}, footprint, {{-3, 3}, {-3, 3}, {-kPi, kPi}},
                             0.0);
}

Vector Q(std::initializer_list<double> v) {
  Vector q(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) q[i++] = x;
  return q;
}

/// Closed-form two-link unit-arm IK: both elbow branches.
std::vector<Vector> TwoLinkOracle(const Vector2& p) {
  const double c2 = (p.squaredNorm() - 2.0) / 2.0;
  std::vector<Vector> out;
  for (double sign : {1.0, -1.0}) {
    const double q2 = sign * std::acos(std::clamp(c2, -1.0, 1.0));
    const double q1 = std::atan2(p.y(), p.x()) - std::atan2(std::sin(q2), 1.0 + std::cos(q2));
    out.push_back(Q({std::remainder(q1, 2 * kPi), q2}));
  }
  return out;
}

}  // namespace

TEST_CASE("signed distance of a disc base to a circle is the closed-form gap") {
  const Environment env = CircleBase(0.1);
  CHECK(SignedDistance(env, Q({1.0, 0.0, 0.0})) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(SignedDistance(env, Q({0.3, 0.0, 0.0})) == doctest::Approx(-0.3).epsilon(1e-12));
}

TEST_CASE("closed-form gap agrees with dense sampling of the footprint boundary") {
  const Environment env = CircleBase(0.1);
  Rng rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector2 c(u(rng), u(rng));
    if (c.norm() < 0.65) continue;
    double sampled = 1e9;
    for (int k = 0; k < 4000; ++k) {
      const double a = 2 * kPi * k / 4000.0;
      const Vector2 p = c + 0.1 * Vector2(std::cos(a), std::sin(a));
      sampled = std::min(sampled, p.norm() - 0.5);
    }
    CHECK(SignedDistance(env, Q({c.x(), c.y(), 0.0})) == doctest::Approx(sampled).epsilon(1e-5));
  }
}

TEST_CASE("an empty scene reports the no-obstacle sentinel") {
  CHECK(SignedDistance(*EmptyBase(), Q({0.5, 0.5, 0.0})) == kNoObstacleDistance);
  CHECK(SignedDistance(*TwoLinkArm(), Q({0.1, 0.2})) == kNoObstacleDistance);
}

TEST_CASE("signed distance rejects a configuration of the wrong dimension") {
  CHECK_THROWS_AS(SignedDistance(*BoxScene(), Q({0.0, 0.0})), InputError);
}

TEST_CASE("signed distance is Lipschitz under tiny perturbations") {
  const auto arm = std::make_shared<const Environment>(Environment::Arm(
      "arm", {0.5, 0.5, 0.5}, {Circle{Vector2(0.8, 0.4), 0.2}, Box{Vector2(-0.6, 0.5), Vector2(-0.2, 1.2)}},
      {{-kPi, kPi}, {-2.6, 2.6}, {-2.6, 2.6}}));
  Rng rng(11);
  std::uniform_real_distribution<double> u(-2.5, 2.5), d(-1.0, 1.0);
  for (const auto& env : {arm, BoxScene()}) {
    for (int trial = 0; trial < 200; ++trial) {
      Vector q(env->dof()), delta(env->dof());
      for (int i = 0; i < env->dof(); ++i) {
        q[i] = u(rng);
        delta[i] = d(rng);
      }
      delta *= 1e-6 / delta.norm();
      CHECK(std::abs(SignedDistance(*env, q + delta) - SignedDistance(*env, q)) <= 10.0 * delta.norm());
    }
  }
}

TEST_CASE("segment distance to a box matches dense sampling") {
  const Obstacle box = Box{Vector2(-0.5, -0.25), Vector2(0.5, 0.25)};
  Rng rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector2 a(u(rng), u(rng)), b(u(rng), u(rng));
    double sampled = 1e9;
    for (int k = 0; k <= 20000; ++k) sampled = std::min(sampled, PointSignedDistance(box, a + (b - a) * (k / 20000.0)));
    CHECK(SegmentSignedDistance(box, a, b) <= sampled + 1e-12);
    CHECK(SegmentSignedDistance(box, a, b) >= sampled - 2e-4 * (b - a).norm() - 1e-12);
  }
}

TEST_CASE("convex hull drops interior and collinear points") {
  const auto hull = ConvexHull({Vector2(0, 0), Vector2(1, 0), Vector2(0.5, 0), Vector2(1, 1), Vector2(0, 1),
                                Vector2(0.5, 0.5)});
  CHECK(hull.size() == 4);
  CHECK(ConvexHull({Vector2(0, 0), Vector2(1, 1), Vector2(2, 2)}).size() == 2);
  CHECK(ConvexHull({Vector2(1, 1), Vector2(1, 1)}).size() == 1);
}

TEST_CASE("convex polygon distance: separated, touching and overlapping a box") {
  const Obstacle box = Box{Vector2(0, 0), Vector2(1, 1)};
  const auto square = [](double x0, double y0) {
    return ConvexHull({Vector2(x0, y0), Vector2(x0 + 0.5, y0), Vector2(x0 + 0.5, y0 + 0.5), Vector2(x0, y0 + 0.5)});
  };
  CHECK(ConvexSignedDistance(square(1.5, 0.25), box) == doctest::Approx(0.5));
  CHECK(ConvexSignedDistance(square(1.0, 0.25), box) == doctest::Approx(0.0));
  CHECK(ConvexSignedDistance(square(0.8, 0.25), box) == doctest::Approx(-0.2));
  CHECK(ConvexSignedDistance(square(2.0, 2.0), box) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("swept distance never exceeds either endpoint's distance") {
  const auto env = std::make_shared<const Environment>(Environment::Arm(
      "arm", {0.6, 0.6}, {Circle{Vector2(0.9, 0.5), 0.2}, Box{Vector2(-0.8, 0.3), Vector2(-0.4, 0.9)}},
      {{-kPi, kPi}, {-2.6, 2.6}}));
  Rng rng(8);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (const auto& e : {env, BoxScene()}) {
    for (int trial = 0; trial < 300; ++trial) {
      Vector a(e->dof()), b(e->dof());
      for (int i = 0; i < e->dof(); ++i) {
        a[i] = u(rng);
        b[i] = u(rng);
      }
      const double swept = SweptSignedDistance(*e, a, b);
      CHECK(swept <= std::min(SignedDistance(*e, a), SignedDistance(*e, b)) + 1e-12);
    }
  }
}

TEST_CASE("a base step jumping over a box is caught by the swept check") {
  const auto env = BoxScene();
  const Vector a = Q({0.0, -0.5, 0.0}), b = Q({0.0, 0.5, 0.0});
  CHECK(SignedDistance(*env, a) > 0.0);
  CHECK(SignedDistance(*env, b) > 0.0);
  CHECK(SweptSignedDistance(*env, a, b) < 0.0);
}

TEST_CASE("forward kinematics of simple chains") {
  const auto three = Environment::Arm("three", {1, 1, 1}, {}, {{-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi}});
  const auto fk0 = ForwardKinematics(three, Q({0, 0, 0}));
  CHECK(fk0.tip.x() == doctest::Approx(3.0));
  CHECK(fk0.tip.y() == doctest::Approx(0.0));
  CHECK(fk0.joints.size() == 3);
  const auto two = TwoLinkArm();
  const Vector2 up = ForwardKinematics(*two, Q({kPi / 2, 0})).tip;
  CHECK(up.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(up.y() == doctest::Approx(2.0));
  const Vector2 elbow = ForwardKinematics(*two, Q({kPi / 2, -kPi / 2})).tip;
  CHECK(elbow.x() == doctest::Approx(1.0));
  CHECK(elbow.y() == doctest::Approx(1.0));
}

TEST_CASE("tip Jacobian matches central differences") {
  const auto env = Environment::Arm("arm", {0.7, 0.5, 0.3}, {}, {{-kPi, kPi}, {-kPi, kPi}, {-kPi, kPi}});
  const Vector q = Q({0.3, -0.8, 1.1});
  const auto jac = TipJacobian(env, q);
  for (int i = 0; i < 3; ++i) {
    Vector dq = Vector::Zero(3);
    dq[i] = 1e-6;
    const Vector2 fd = (ForwardKinematics(env, q + dq).tip - ForwardKinematics(env, q - dq).tip) / 2e-6;
    CHECK((jac.col(i) - fd).norm() < 1e-7);
  }
}

TEST_CASE("IK of a fully stretched two-link arm has the single straight solution") {
  Rng rng(1);
  const auto ik = InverseKinematics(*TwoLinkArm(), Vector2(2.0, 0.0), 5, rng);
  REQUIRE(ik.solutions.size() == 1);
  CHECK(ik.solutions[0].cwiseAbs().maxCoeff() < 0.05);
  CHECK_FALSE(ik.unreachable);
}

TEST_CASE("IK of a two-link arm finds both elbow branches of the analytic oracle") {
  Rng rng(2);
  const Vector2 target(1.0, 1.0);
  const auto ik = InverseKinematics(*TwoLinkArm(), target, 20, rng);
  REQUIRE(ik.solutions.size() == 2);
  const auto oracle = TwoLinkOracle(target);
  for (const auto& s : ik.solutions) {
    CHECK((ForwardKinematics(*TwoLinkArm(), s).tip - target).norm() <= 1e-3);
    double best = 1e9;
    for (const auto& o : oracle) best = std::min(best, (s - o).cwiseAbs().maxCoeff());
    CHECK(best < 1e-2);
  }
}

TEST_CASE("IK solutions reach random targets within tolerance") {
  Rng rng(4);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector2 target(u(rng), u(rng));
    const auto ik = InverseKinematics(*TwoLinkArm(), target, 5, rng);
    for (const auto& s : ik.solutions) CHECK((ForwardKinematics(*TwoLinkArm(), s).tip - target).norm() <= 1e-3);
  }
}

TEST_CASE("IK flags targets beyond the arm's reach") {
  Rng rng(3);
  const auto ik = InverseKinematics(*TwoLinkArm(), Vector2(3.0, 0.0), 5, rng);
  CHECK(ik.solutions.empty());
  CHECK(ik.unreachable);
}

TEST_CASE("straight-line path examples") {
  const Vector z = Q({0.3, -0.2});
  const Path constant = StraightLinePath(z, z, 7);
  for (int t = 0; t <= 7; ++t) CHECK(constant.at(t) == z);

  const Path line = StraightLinePath(Q({0.0}), Q({1.0}), 4);
  for (int t = 0; t <= 4; ++t) CHECK(line.at(t)[0] == doctest::Approx(0.25 * t));

  const std::vector<Waypoint> via = {{Q({1.0, 1.0}), "up"}};
  const Path bent = StraightLinePath(Q({0.0, 0.0}), Q({2.0, 0.0}), 4, via);
  CHECK(bent.at(2) == Q({1.0, 1.0}));
  CHECK(bent.at(1)[0] == doctest::Approx(0.5));
  CHECK(bent.at(3)[0] == doctest::Approx(1.5));
}

TEST_CASE("straight-line path hits endpoints exactly with constant steps per segment") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix ends = RandomMatrix(3, 4, rng, -2, 2);
    const std::vector<Waypoint> via = {{ends.col(2), "w"}};
    const int steps = 5 + trial % 20;
    const Path p = StraightLinePath(ends.col(0), ends.col(1), steps, via);
    CHECK(p.front() == ends.col(0));
    CHECK(p.back() == ends.col(1));
    int hit = -1;
    for (int t = 0; t <= steps; ++t) {
      if (p.at(t) == ends.col(2)) hit = t;
    }
    REQUIRE(hit > 0);
    REQUIRE(hit < steps);
    for (int t = 1; t < hit; ++t) CHECK(MaxAbs((p.at(t + 1) - p.at(t)) - (p.at(1) - p.at(0))) < 1e-12);
    for (int t = hit + 1; t < steps; ++t) {
      CHECK(MaxAbs((p.at(t + 1) - p.at(t)) - (p.at(steps) - p.at(steps - 1))) < 1e-12);
    }
  }
}

TEST_CASE("straight-line path rejects mismatched dimensions") {
  CHECK_THROWS_AS(StraightLinePath(Q({0.0}), Q({1.0, 2.0}), 4), InputError);
  CHECK_THROWS_AS(StraightLinePath(Q({0.0}), Q({1.0}), 0), InputError);
}

TEST_CASE("environment documents round-trip through JSON") {
  for (const auto& env : {BoxScene(), TwoLinkArm()}) {
    const Environment back = EnvironmentFromJson(EnvironmentToJson(*env));
    CHECK(EnvironmentToJson(back) == EnvironmentToJson(*env));
  }
}

TEST_CASE("malformed environment documents are config errors") {
  CHECK_THROWS_AS(EnvironmentFromJson({{"kind", "tank"}, {"joint_limits", nlohmann::json::array()}}), ConfigError);
  CHECK_THROWS_AS(EnvironmentFromJson({{"kind", "arm"}}), ConfigError);
  nlohmann::json bad_radius = EnvironmentToJson(*BoxScene());
  bad_radius["obstacles"] = {{{"type", "circle"}, {"center", {0, 0}}, {"radius", -1.0}}};
  CHECK_THROWS_AS(EnvironmentFromJson(bad_radius), ConfigError);
}
