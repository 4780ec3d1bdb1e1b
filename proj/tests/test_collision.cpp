#include "safe_arm/checks.hpp"
#include "safe_arm/collision.hpp"
#include "safe_arm/env.hpp"
#include "safe_arm/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace safe_arm {
namespace {

const Aabb kUnit{Vec3::Zero(), Vec3::Ones()};

TEST(PointAabbDistance, InsideFaceEdge) {
  EXPECT_EQ(point_aabb_distance(Vec3(0.5, 0.5, 0.5), kUnit), 0.0);
  EXPECT_DOUBLE_EQ(point_aabb_distance(Vec3(2, 0.5, 0.5), kUnit), 1.0);
  EXPECT_DOUBLE_EQ(point_aabb_distance(Vec3(2, 2, 0.5), kUnit), std::sqrt(2.0));
}

TEST(SegmentAabbDistance, InsideAndNearestEndpoint) {
  EXPECT_EQ(segment_aabb_distance(Vec3(0.2, 0.2, 0.2), Vec3(0.8, 0.8, 0.8), kUnit), 0.0);
  EXPECT_NEAR(segment_aabb_distance(Vec3(2, 0.5, 0.5), Vec3(3, 0.5, 0.5), kUnit), 1.0, 1e-12);
}

TEST(SegmentAabbDistance, CrossingSegmentIsZero) {
  // Endpoints outside, midpoint inside.
  EXPECT_EQ(segment_aabb_distance(Vec3(-1, 0.5, 0.5), Vec3(2, 0.5, 0.5), kUnit), 0.0);
}

TEST(SegmentAabbDistance, InteriorMinimumFoundBetweenSamples) {
  // Passes 0.3 above the top edge; the minimum sits mid-segment.
  const double d = segment_aabb_distance(Vec3(-5, 0.5, 1.3), Vec3(6, 0.5, 1.3), kUnit);
  EXPECT_NEAR(d, 0.3, 1e-9);
}

TEST(SegmentAabbDistance, MatchesDenseOracle) {
  Rng rng(77);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 lo(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Vec3 hi = lo + Vec3(rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 1));
    const Vec3 p0(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3 p1(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const double fast = segment_aabb_distance(p0, p1, Aabb{lo, hi});
    const double dense = checks::dense_segment_box_distance(p0, p1, lo, hi, 4096);
    ASSERT_NEAR(fast, dense, 1e-3) << "pair " << k;
    ASSERT_LE(fast, dense + 1e-12);
  }
}

TEST(SegmentAabbDistance, TranslationInvariant) {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const Vec3 lo(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const Aabb box{lo, lo + Vec3::Constant(0.4)};
    const Vec3 p0(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3 p1(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const Vec3 t(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    const Aabb moved{box.min_corner + t, box.max_corner + t};
    EXPECT_NEAR(segment_aabb_distance(p0, p1, box), segment_aabb_distance(p0 + t, p1 + t, moved),
                1e-12);
  }
}

TEST(CapsuleAabb, GrowingBoxNeverIncreasesClearance) {
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    const Capsule c{Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)),
                    Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)), 0.05};
    const Aabb small = Aabb::centered(Vec3::Zero(), Vec3::Constant(0.3));
    const Aabb big{small.min_corner - Vec3::Constant(rng.uniform(0, 0.5)),
                   small.max_corner + Vec3::Constant(rng.uniform(0, 0.5))};
    EXPECT_LE(capsule_aabb_collides(c, big).clearance,
              capsule_aabb_collides(c, small).clearance + 1e-12);
  }
}

TEST(CapsuleAabb, FarThroughAndTouching) {
  const Capsule far{Vec3(5, 5, 5), Vec3(6, 5, 5), 0.1};
  const auto a = capsule_aabb_collides(far, kUnit);
  EXPECT_FALSE(a.collides);
  EXPECT_GT(a.clearance, 0.0);

  const Capsule through{Vec3(-1, 0.5, 0.5), Vec3(2, 0.5, 0.5), 0.01};
  EXPECT_TRUE(capsule_aabb_collides(through, kUnit).collides);

  // Radius exactly equals the axis distance.
  const Capsule touching{Vec3(1.5, 0.5, 0.5), Vec3(2.5, 0.5, 0.5), 0.5};
  const auto t = capsule_aabb_collides(touching, kUnit);
  EXPECT_EQ(t.clearance, 0.0);
  EXPECT_TRUE(t.collides);
}

TEST(CapsuleAabb, RejectsBadInput) {
  EXPECT_THROW(capsule_aabb_collides(Capsule{Vec3::Zero(), Vec3::Ones(), 0.0}, kUnit),
               ContractViolation);
  EXPECT_THROW(segment_aabb_distance(Vec3::Zero(), Vec3::Ones(), Aabb{Vec3::Ones(), Vec3::Zero()}),
               ContractViolation);
  // Degenerate capsule is a sphere.
  const auto s = capsule_aabb_collides(Capsule{Vec3(2, 0.5, 0.5), Vec3(2, 0.5, 0.5), 1.0}, kUnit);
  EXPECT_TRUE(s.collides);
}

TEST(ArmObstacleQuery, HomePoseFarAndTipEnclosed) {
  const ArmModel arm = default_panda_model();
  const LinkFrames fk = forward_kinematics(arm, JointVector::Zero(7));
  const auto radii = arm.collision_radii();

  const Aabb far[1] = {Aabb::centered(Vec3(3, 3, 0), Vec3::Constant(0.1))};
  EXPECT_FALSE(arm_obstacle_query(fk, radii, far).any_collision);

  const Aabb at_tip[1] = {Aabb::centered(fk.tip, Vec3::Constant(0.1))};
  const auto hit = arm_obstacle_query(fk, radii, at_tip);
  EXPECT_TRUE(hit.any_collision);
  EXPECT_LT(hit.min_clearance, 0.0);
}

TEST(ArmObstacleQuery, MinOverPairsAndRadiusCountCheck) {
  const ArmModel arm = default_panda_model();
  const LinkFrames fk = forward_kinematics(arm, JointVector::Zero(7));
  const auto radii = arm.collision_radii();
  const Aabb one[1] = {Aabb::centered(Vec3(1, 0, 0.4), Vec3::Constant(0.1))};
  const Aabb two[2] = {one[0], Aabb::centered(Vec3(0.5, 0, 0.4), Vec3::Constant(0.1))};
  const double c1 = arm_obstacle_query(fk, radii, one).min_clearance;
  const double c2 = arm_obstacle_query(fk, radii, two).min_clearance;
  EXPECT_NEAR(c1, 0.95 - 0.05, 1e-9);
  EXPECT_NEAR(c2, 0.45 - 0.05, 1e-9);

  const std::vector<double> short_radii(3, 0.05);
  EXPECT_THROW(arm_obstacle_query(fk, short_radii, one), ContractViolation);
}

TEST(ArmObstacleQuery, AgreesWithMonteCarloOracle) {
  const auto r = checks::check_capsule_collisions(1000, 31);
  EXPECT_TRUE(r.passed) << r.detail;
}

}  // namespace
}  // namespace safe_arm
