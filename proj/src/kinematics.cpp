#include "safe_arm/kinematics.hpp"

#include "safe_arm/errors.hpp"
#include "safe_arm/json_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace safe_arm {

namespace {

void check_dims(const ArmModel& model, const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) {
    throw ContractViolation(
        fmt::format("joint vector has {} entries, arm has {} joints", q.size(), model.dof()));
  }
}

}  // namespace

std::vector<double> ArmModel::collision_radii() const {
  std::vector<double> radii;
  radii.reserve(joints.size());
  for (const auto& j : joints) radii.push_back(j.collision_radius);
  return radii;
}

double ArmModel::reach() const {
  double total = tip_offset.norm();
  for (std::size_t i = 1; i < joints.size(); ++i) total += joints[i].origin.norm();
  return total;
}

Vec3 ArmModel::shoulder() const {
  return base_pose * (joints.empty() ? Vec3::Zero() : joints.front().origin);
}

void ArmModel::validate() const {
  require(!joints.empty(), "arm model needs at least one joint");
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto& j = joints[i];
    require(std::abs(j.axis.norm() - 1.0) <= 1e-9,
            fmt::format("joint {} axis is not a unit vector", i));
    require(j.origin.allFinite(), fmt::format("joint {} origin is not finite", i));
    require(j.limit_lo < j.limit_hi, fmt::format("joint {} has limit_lo >= limit_hi", i));
    require(j.collision_radius > 0.0, fmt::format("joint {} collision radius must be > 0", i));
  }
  require(tip_offset.allFinite(), "tip offset is not finite");
}

Eigen::Matrix3d axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

LinkFrames forward_kinematics(const ArmModel& model, const JointVector& q) {
  check_dims(model, q);
  LinkFrames out;
  out.frames.reserve(model.dof() + 1);
  Eigen::Isometry3d pose = model.base_pose;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const auto& joint = model.joints[i];
    Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
    local.translation() = joint.origin;
    local.linear() = axis_angle(joint.axis, q[static_cast<Eigen::Index>(i)]);
    pose = pose * local;
    out.frames.push_back(pose);
  }
  Eigen::Isometry3d tip = pose;
  tip.translation() = pose * model.tip_offset;
  out.frames.push_back(tip);
  out.tip = tip.translation();
  return out;
}

Eigen::Matrix3Xd tip_jacobian(const ArmModel& model, const JointVector& q) {
  const LinkFrames fk = forward_kinematics(model, q);
  Eigen::Matrix3Xd jac(3, static_cast<Eigen::Index>(model.dof()));
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const auto& frame = fk.frames[i];
    const Vec3 world_axis = frame.linear() * model.joints[i].axis;
    jac.col(static_cast<Eigen::Index>(i)) = world_axis.cross(fk.tip - frame.translation());
  }
  return jac;
}

JointVector clamp_joints(const ArmModel& model, const Eigen::VectorXd& q) {
  check_dims(model, q);
  JointVector out = q;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[k] = std::clamp(q[k], model.joints[i].limit_lo, model.joints[i].limit_hi);
  }
  return out;
}

bool within_limits(const ArmModel& model, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != model.dof()) return false;
  for (std::size_t i = 0; i < model.dof(); ++i) {
    const double v = q[static_cast<Eigen::Index>(i)];
    if (!(v >= model.joints[i].limit_lo && v <= model.joints[i].limit_hi)) return false;
  }
  return true;
}

JointVector solve_ik_delta(const ArmModel& model, const JointVector& q, const Vec3& target_tip,
                           const IkOptions& options) {
  check_dims(model, q);
  require(q.allFinite(), "IK start configuration contains NaN or Inf");
  require(target_tip.allFinite(), "IK target contains NaN or Inf");
  require(options.damping > 0.0, "IK damping must be positive");

  JointVector current = clamp_joints(model, q);
  Vec3 error = target_tip - forward_kinematics(model, current).tip;
  JointVector best = current;
  double best_err = error.norm();
  const double mu2 = options.damping * options.damping;

  for (int it = 0; it < options.max_iterations && best_err >= options.tolerance; ++it) {
    const Eigen::Matrix3Xd jac = tip_jacobian(model, current);
    const Eigen::Matrix3d jjt = jac * jac.transpose() + mu2 * Eigen::Matrix3d::Identity();
    // J J^T + mu^2 I is symmetric positive definite for mu > 0.
    const Vec3 w = jjt.llt().solve(error);
    current = clamp_joints(model, current + jac.transpose() * w);
    error = target_tip - forward_kinematics(model, current).tip;
    const double err = error.norm();
    if (err < best_err) {
      best_err = err;
      best = current;
    }
  }
  return best;
}

ArmModel load_arm_model(const std::filesystem::path& path) {
  return arm_model_from_json(read_json_file(path));
}

}  // namespace safe_arm
