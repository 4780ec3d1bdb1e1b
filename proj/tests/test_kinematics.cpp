#include "safe_arm/checks.hpp"
#include "safe_arm/env.hpp"
#include "safe_arm/errors.hpp"
#include "safe_arm/kinematics.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace safe_arm {
namespace {

using std::numbers::pi;

TEST(ForwardKinematics, OneJointHomeAndQuarterTurn) {
  const ArmModel arm = test::one_joint_arm();
  JointVector q(1);
  q << 0.0;
  EXPECT_TRUE(forward_kinematics(arm, q).tip.isApprox(Vec3(1, 0, 0), 1e-15));
  q << pi / 2;
  const Vec3 tip = forward_kinematics(arm, q).tip;
  EXPECT_NEAR(tip.x(), 0.0, 1e-15);
  EXPECT_NEAR(tip.y(), 1.0, 1e-15);
  EXPECT_NEAR(tip.z(), 0.0, 1e-15);
}

TEST(ForwardKinematics, PlanarTwoLinkMatchesTrig) {
  const ArmModel arm = test::planar_two_link();
  JointVector q(2);
  q << pi / 4, pi / 4;
  // Hand-derived: link 1 at 45 degrees, link 2 at 90 degrees.
  const Vec3 expected(std::cos(pi / 4) + std::cos(pi / 2), std::sin(pi / 4) + std::sin(pi / 2), 0.0);
  const Vec3 tip = forward_kinematics(arm, q).tip;
  EXPECT_NEAR(tip.x(), 0.7071067811865476, 1e-12);
  EXPECT_NEAR(tip.y(), 1.7071067811865475, 1e-12);
  EXPECT_TRUE(tip.isApprox(expected, 1e-12));
}

TEST(ForwardKinematics, FramesAreProperRigidTransforms) {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const ArmModel arm = checks::random_arm(rng, 1, 7);
    const LinkFrames fk = forward_kinematics(arm, checks::random_joints(arm, rng));
    ASSERT_EQ(fk.frames.size(), arm.dof() + 1);
    for (const auto& f : fk.frames) {
      const Eigen::Matrix3d r = f.linear();
      EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
    }
    EXPECT_EQ(fk.tip, fk.frames.back().translation());
  }
}

TEST(ForwardKinematics, DeterministicBitIdentical) {
  Rng rng(12);
  const ArmModel arm = default_panda_model();
  const JointVector q = checks::random_joints(arm, rng);
  const LinkFrames a = forward_kinematics(arm, q);
  const LinkFrames b = forward_kinematics(arm, q);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    EXPECT_EQ(a.frames[i].matrix(), b.frames[i].matrix());
  }
}

TEST(ForwardKinematics, DimensionMismatchThrows) {
  EXPECT_THROW(forward_kinematics(test::planar_two_link(), JointVector::Zero(3)), ContractViolation);
  EXPECT_THROW(tip_jacobian(test::planar_two_link(), JointVector::Zero(1)), ContractViolation);
}

TEST(TipJacobian, OneJointColumn) {
  const Eigen::Matrix3Xd j = tip_jacobian(test::one_joint_arm(), JointVector::Zero(1));
  EXPECT_TRUE(j.col(0).isApprox(Vec3(0, 1, 0), 1e-15));
}

TEST(TipJacobian, PlanarLeverArms) {
  const Eigen::Matrix3Xd j = tip_jacobian(test::planar_two_link(), JointVector::Zero(2));
  EXPECT_TRUE(j.col(0).isApprox(Vec3(0, 2, 0), 1e-15));
  EXPECT_TRUE(j.col(1).isApprox(Vec3(0, 1, 0), 1e-15));
}

TEST(TipJacobian, MatchesFiniteDifferencesOnRandomArms) {
  const auto r = checks::check_jacobian(100, 99);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(SolveIk, TargetAtCurrentTipLeavesJointsUnchanged) {
  Rng rng(1);
  const ArmModel arm = default_panda_model();
  const JointVector q = checks::random_joints(arm, rng);
  const JointVector out = solve_ik_delta(arm, q, forward_kinematics(arm, q).tip);
  EXPECT_EQ(out, q);
}

TEST(SolveIk, PlanarReachableTarget) {
  const ArmModel arm = test::planar_two_link();
  const Vec3 target(1.9, 0.2, 0.0);
  const JointVector q = solve_ik_delta(arm, JointVector::Zero(2), target);
  EXPECT_LT((forward_kinematics(arm, q).tip - target).norm(), 1e-3);
}

TEST(SolveIk, UnreachableTargetStretchesTowardIt) {
  const ArmModel arm = test::planar_two_link();
  // Start bent so the solver has to straighten and turn the chain.
  JointVector q0(2);
  q0 << 0.3, 0.6;
  const Vec3 target(2.2, 1.6, 0.0);
  IkOptions opts;
  const JointVector q = solve_ik_delta(arm, q0, target, opts);
  const Vec3 tip = forward_kinematics(arm, q).tip;
  // Geometric oracle: the closest reachable point lies on the reach circle
  // along the bearing to the target.
  const double expect_gap = target.norm() - 2.0;
  EXPECT_NEAR((tip - target).norm(), expect_gap, 1e-2);
  EXPECT_NEAR(tip.norm(), 2.0, 1e-2);
  EXPECT_GT(tip.normalized().dot(target.normalized()), 0.999);
}

TEST(SolveIk, ResultRespectsJointLimits) {
  ArmModel arm = test::planar_two_link();
  for (auto& j : arm.joints) {
    j.limit_lo = -0.5;
    j.limit_hi = 0.5;
  }
  const JointVector q = solve_ik_delta(arm, JointVector::Zero(2), Vec3(-1.0, 1.0, 0.0));
  EXPECT_TRUE(within_limits(arm, q));
}

TEST(SolveIk, NanInputsRejected) {
  const ArmModel arm = test::planar_two_link();
  EXPECT_THROW(solve_ik_delta(arm, JointVector::Zero(2), Vec3(NAN, 0, 0)), ContractViolation);
  JointVector q(2);
  q << NAN, 0.0;
  EXPECT_THROW(solve_ik_delta(arm, q, Vec3(1, 0, 0)), ContractViolation);
}

TEST(SolveIk, RoundTripOnReachableTargets) {
  const auto r = checks::check_ik_round_trip(1000, 5);
  EXPECT_TRUE(r.passed) << r.detail;
}

TEST(ClampJoints, InsideUnchangedOutsideClipped) {
  const ArmModel arm = default_panda_model();
  JointVector q = JointVector::Constant(7, 0.3);
  EXPECT_EQ(clamp_joints(arm, q), q);
  q[2] = arm.joints[2].limit_hi + 1.0;
  q[4] = -10.0;
  const JointVector c = clamp_joints(arm, q);
  EXPECT_EQ(c[2], arm.joints[2].limit_hi);
  EXPECT_EQ(c[4], -2.9);
  EXPECT_THROW(clamp_joints(arm, JointVector::Zero(6)), ContractViolation);
}

TEST(ArmModel, ValidationRejectsBrokenInvariants) {
  ArmModel arm = test::planar_two_link();
  EXPECT_NO_THROW(arm.validate());
  arm.joints[0].axis = Vec3(1, 1, 0);
  EXPECT_THROW(arm.validate(), ContractViolation);
  arm = test::planar_two_link();
  arm.joints[1].limit_lo = 1.0;
  arm.joints[1].limit_hi = 1.0;
  EXPECT_THROW(arm.validate(), ContractViolation);
  arm = test::planar_two_link();
  arm.joints[1].collision_radius = 0.0;
  EXPECT_THROW(arm.validate(), ContractViolation);
  EXPECT_THROW(ArmModel{}.validate(), ContractViolation);
}

TEST(ArmModel, ShippedPandaFileMatchesBuiltIn) {
  const ArmModel file = load_arm_model(SAFE_ARM_CONFIG_DIR "/panda.json");
  const ArmModel builtin = default_panda_model();
  ASSERT_EQ(file.dof(), 7u);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_EQ(file.joints[i].axis, builtin.joints[i].axis);
    EXPECT_EQ(file.joints[i].origin, builtin.joints[i].origin);
    EXPECT_EQ(file.joints[i].limit_lo, builtin.joints[i].limit_lo);
    EXPECT_EQ(file.joints[i].limit_hi, builtin.joints[i].limit_hi);
    EXPECT_EQ(file.joints[i].collision_radius, builtin.joints[i].collision_radius);
  }
  EXPECT_EQ(file.tip_offset, builtin.tip_offset);
  // 0.85 m of link offsets in total, 0.80 m of it above joint 0.
  EXPECT_NEAR(builtin.reach(), 0.80, 1e-12);
}

}  // namespace
}  // namespace safe_arm
