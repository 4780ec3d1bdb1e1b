#include "safe_arm/env.hpp"
#include "safe_arm/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace safe_arm {
namespace {

EnvConfig panda_config(ActionRepr repr) {
  EnvConfig c;
  c.arm = default_panda_model();
  c.action_repr = repr;
  return c;
}

JointVector bent_pose() {
  JointVector q = JointVector::Zero(7);
  q << 0.0, 0.6, 0.0, 0.8, 0.0, 0.5, 0.0;
  return q;
}

TEST(Reward, NegativeDistance) {
  EXPECT_EQ(compute_reward(Vec3(1, 2, 3), Vec3(1, 2, 3)), 0.0);
  EXPECT_DOUBLE_EQ(compute_reward(Vec3(1, 0, 0), Vec3(0, 0, 0)), -1.0);
  const Vec3 dir = Vec3(1, 2, -1).normalized();
  double prev = -1e9;
  for (double d = 2.0; d >= 0.0; d -= 0.1) {
    const double r = compute_reward(d * dir, Vec3::Zero());
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(ReachEnv, ObservationShapes) {
  Rng rng(1);
  ReachEnv ar1(panda_config(ActionRepr::kCartesian));
  ReachEnv ar2(panda_config(ActionRepr::kJoint));
  EXPECT_EQ(ar1.reset(rng).size(), 9);
  EXPECT_EQ(ar2.reset(rng).size(), 16);
  EXPECT_EQ(ar1.act_dim(), 3u);
  EXPECT_EQ(ar2.act_dim(), 7u);
}

TEST(ReachEnv, ResetDeterministicAndAtHome) {
  ReachEnv a(panda_config(ActionRepr::kJoint));
  ReachEnv b(panda_config(ActionRepr::kJoint));
  Rng ra(5), rb(5);
  for (int k = 0; k < 10; ++k) {
    const auto oa = a.reset(ra);
    const auto ob = b.reset(rb);
    EXPECT_EQ(oa, ob);
    EXPECT_EQ(a.target(), b.target());
    EXPECT_EQ(a.obstacle().min_corner, b.obstacle().min_corner);
    EXPECT_TRUE(a.joints().isZero(0.0));
    EXPECT_EQ(a.steps_taken(), 0);
  }
}

TEST(ReachEnv, PlacementAudit) {
  const EnvConfig cfg = panda_config(ActionRepr::kCartesian);
  ReachEnv env(cfg);
  Rng rng(99);
  for (int k = 0; k < 1000; ++k) {
    env.reset(rng);
    const Vec3 t = env.target();
    const Vec3 c = env.obstacle().center();
    ASSERT_FALSE(env.obstacle().contains(t));
    ASSERT_TRUE(cfg.target_region.contains(t));
    ASSERT_TRUE(cfg.obstacle_region.contains(c));
    // In front of the target along the base bearing.
    const Eigen::Vector2d bearing = t.head<2>().normalized();
    const double along = c.head<2>().dot(bearing);
    ASSERT_GT(along, 0.0);
    ASSERT_LT(along, t.head<2>().norm());
  }
}

TEST(ReachEnv, InfeasibleRegionsThrow) {
  EnvConfig cfg = panda_config(ActionRepr::kCartesian);
  // Obstacle region behind the base: never between base and target.
  cfg.obstacle_region = Aabb{Vec3(-0.6, -0.1, 0.05), Vec3(-0.4, 0.1, 0.1)};
  ReachEnv env(cfg);
  Rng rng(1);
  EXPECT_THROW(env.reset(rng), ConfigError);
}

TEST(ReachEnv, ZeroJointActionKeepsPose) {
  ReachEnv env(panda_config(ActionRepr::kJoint));
  Rng rng(2);
  env.reset(rng);
  env.set_joints(bent_pose());
  const JointVector q0 = env.joints();
  const double d0 = (env.tip() - env.target()).norm();
  const auto r = env.step(Eigen::VectorXd::Zero(7));
  EXPECT_EQ(env.joints(), q0);
  EXPECT_DOUBLE_EQ(r.reward, -d0);
}

TEST(ReachEnv, JointActionIsClippedAndScaled) {
  ReachEnv env(panda_config(ActionRepr::kJoint));
  Rng rng(2);
  env.reset(rng);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(7);
  a[1] = 5.0;
  a[3] = -0.5;
  env.step(a);
  EXPECT_DOUBLE_EQ(env.joints()[1], 0.05);
  EXPECT_DOUBLE_EQ(env.joints()[3], -0.025);
}

TEST(ReachEnv, CartesianActionMovesTip) {
  ReachEnv env(panda_config(ActionRepr::kCartesian));
  Rng rng(3);
  env.reset(rng);
  env.set_task(Vec3(0.4, 0.0, 0.1), Vec3(-0.5, -0.5, 0.05));
  env.set_joints(bent_pose());
  const Vec3 before = env.tip();
  env.step(Eigen::Vector3d(1, 0, 0));
  EXPECT_NEAR(env.tip().x(), before.x() + 0.05, 1e-3);
  EXPECT_NEAR(env.tip().y(), before.y(), 1e-3);
  EXPECT_NEAR(env.tip().z(), before.z(), 1e-3);
}

TEST(ReachEnv, SuccessEndsEpisode) {
  ReachEnv env(panda_config(ActionRepr::kJoint));
  Rng rng(4);
  env.reset(rng);
  env.set_task(env.tip() + Vec3(0.01, 0, 0), Vec3(2, 2, 0));
  const auto r = env.step(Eigen::VectorXd::Zero(7));
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.info.success);
  EXPECT_FALSE(r.info.truncated);
}

TEST(ReachEnv, TruncatesAtMaxSteps) {
  EnvConfig cfg = panda_config(ActionRepr::kJoint);
  cfg.max_episode_steps = 7;
  ReachEnv env(cfg);
  Rng rng(4);
  env.reset(rng);
  for (int k = 1; k <= 7; ++k) {
    const auto r = env.step(Eigen::VectorXd::Zero(7));
    EXPECT_EQ(r.done, k == 7);
    EXPECT_EQ(r.info.truncated, k == 7);
  }
}

TEST(ReachEnv, CostMatchesCollisionQuery) {
  ReachEnv env(panda_config(ActionRepr::kJoint));
  Rng rng(6), act(7);
  env.reset(rng);
  int hits = 0;
  for (int k = 0; k < 400; ++k) {
    Eigen::VectorXd a(7);
    for (int i = 0; i < 7; ++i) a[i] = act.uniform(-1, 1);
    a[1] = 0.8;  // lean toward the obstacle
    const auto r = env.step(a);
    const Aabb boxes[1] = {env.obstacle()};
    const auto radii = env.config().arm.collision_radii();
    const bool hit = arm_obstacle_query(env.frames(), radii, boxes).any_collision;
    ASSERT_EQ(r.cost, hit ? 1.0 : 0.0);
    ASSERT_LE(-r.reward, env.config().arm.reach() + (env.target() - env.config().arm.shoulder()).norm());
    hits += hit;
    if (r.done) env.reset(rng);
  }
  EXPECT_GT(hits, 0);
}

TEST(ReachEnv, TrajectoryIsPureFunctionOfSeedAndActions) {
  auto run = [](std::uint64_t seed) {
    ReachEnv env(panda_config(ActionRepr::kCartesian));
    Rng rng(seed), act(100);
    env.reset(rng);
    std::vector<double> trace;
    for (int k = 0; k < 60; ++k) {
      const Eigen::Vector3d a(act.uniform(-1, 1), act.uniform(-1, 1), act.uniform(-1, 1));
      const auto r = env.step(a);
      trace.insert(trace.end(), r.obs.data(), r.obs.data() + r.obs.size());
      trace.push_back(r.reward);
      trace.push_back(r.cost);
    }
    return trace;
  };
  EXPECT_EQ(run(8), run(8));
  EXPECT_NE(run(8), run(9));
}

TEST(ReachEnv, CollisionDoesNotTerminate) {
  ReachEnv env(panda_config(ActionRepr::kJoint));
  Rng rng(1);
  env.reset(rng);
  // Box wrapped around the home-pose forearm.
  env.set_task(Vec3(0.4, 0.0, 0.1), Vec3(0.0, 0.0, 0.5));
  const auto r = env.step(Eigen::VectorXd::Zero(7));
  EXPECT_EQ(r.cost, 1.0);
  EXPECT_FALSE(r.done);
}

TEST(ReachEnv, ActionContract) {
  ReachEnv env(panda_config(ActionRepr::kCartesian));
  Rng rng(1);
  env.reset(rng);
  EXPECT_THROW(env.step(Eigen::VectorXd::Zero(7)), ContractViolation);
  EXPECT_THROW(env.step(Eigen::Vector3d(NAN, 0, 0)), ContractViolation);
}

TEST(ReachEnv, TableContactIsNotCost) {
  ReachEnv env(panda_config(ActionRepr::kJoint));
  Rng rng(1);
  env.reset(rng);
  env.set_task(Vec3(0.4, 0.0, 0.1), Vec3(-0.6, 0.6, 0.5));
  JointVector q = JointVector::Zero(7);
  q[1] = 1.7;  // fold the arm down onto the table
  env.set_joints(q);
  const auto r = env.step(Eigen::VectorXd::Zero(7));
  EXPECT_TRUE(env.table_contact());
  EXPECT_EQ(r.cost, 0.0);
}

TEST(EnvConfig, Validation) {
  EnvConfig c = panda_config(ActionRepr::kCartesian);
  c.max_episode_steps = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = panda_config(ActionRepr::kCartesian);
  c.obstacle_size = Vec3(0.1, -0.1, 0.1);
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(to_string(ActionRepr::kJoint), "ar2");
  EXPECT_EQ(action_repr_from_string("ar1"), ActionRepr::kCartesian);
  EXPECT_THROW(action_repr_from_string("ar3"), ConfigError);
}

}  // namespace
}  // namespace safe_arm
