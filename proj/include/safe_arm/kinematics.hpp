#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <filesystem>
#include <vector>

namespace safe_arm {

using Vec3 = Eigen::Vector3d;
// Joint angles in radians, one entry per revolute joint.
using JointVector = Eigen::VectorXd;

struct JointSpec {
  Vec3 axis = Vec3::UnitZ();   // unit vector, parent frame
  Vec3 origin = Vec3::Zero();  // translation from the parent joint frame (m)
  double limit_lo = -2.9;
  double limit_hi = 2.9;
  double collision_radius = 0.05;  // capsule of the link following this joint
};

// Serial chain of revolute joints. Geometry is data: models are loaded from
// JSON so alternative arms only need a new file.
struct ArmModel {
  std::vector<JointSpec> joints;
  Vec3 tip_offset = Vec3::Zero();
  Eigen::Isometry3d base_pose = Eigen::Isometry3d::Identity();

  std::size_t dof() const { return joints.size(); }
  std::vector<double> collision_radii() const;
  // Sum of link lengths from joint 0 to the tip; an upper bound on the
  // distance between joint 0 and any reachable tip position.
  double reach() const;
  Vec3 shoulder() const;  // world position of joint 0 at any pose

  // Throws ContractViolation on any broken invariant.
  void validate() const;
};

struct LinkFrames {
  // frames[i] is the world pose of joint i after its rotation; frames[n] is
  // the tip frame.
  std::vector<Eigen::Isometry3d> frames;
  Vec3 tip = Vec3::Zero();
};

struct IkOptions {
  double damping = 0.05;
  int max_iterations = 10;
  double tolerance = 1e-4;
};

LinkFrames forward_kinematics(const ArmModel& model, const JointVector& q);

// 3 x n positional Jacobian of the tip.
Eigen::Matrix3Xd tip_jacobian(const ArmModel& model, const JointVector& q);

// Damped least squares: dq = J^T (J J^T + mu^2 I)^-1 e. Every iterate is
// clamped to the joint limits; the best iterate seen is returned when the
// target is not reached within the iteration budget.
JointVector solve_ik_delta(const ArmModel& model, const JointVector& q, const Vec3& target_tip,
                           const IkOptions& options = {});

JointVector clamp_joints(const ArmModel& model, const Eigen::VectorXd& q);

bool within_limits(const ArmModel& model, const JointVector& q);

// Rotation of `angle` radians about unit `axis`.
Eigen::Matrix3d axis_angle(const Vec3& axis, double angle);

ArmModel load_arm_model(const std::filesystem::path& path);

}  // namespace safe_arm
