#include "safe_arm/env.hpp"

#include "safe_arm/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace safe_arm {

namespace {

constexpr int kMaxPlacementAttempts = 100;

Vec3 sample_in(const Aabb& box, Rng& rng) {
  Vec3 p;
  for (int i = 0; i < 3; ++i) p[i] = rng.uniform(box.min_corner[i], box.max_corner[i]);
  return p;
}

}  // namespace

std::string to_string(ActionRepr repr) {
  return repr == ActionRepr::kCartesian ? "ar1" : "ar2";
}

ActionRepr action_repr_from_string(const std::string& s) {
  if (s == "ar1" || s == "AR1") return ActionRepr::kCartesian;
  if (s == "ar2" || s == "AR2") return ActionRepr::kJoint;
  throw ConfigError(fmt::format("unknown action representation '{}' (expected ar1 or ar2)", s));
}

void EnvConfig::validate() const {
  arm.validate();
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  check(max_episode_steps >= 1, "max_episode_steps must be >= 1");
  check(action_scale_cart > 0.0, "action_scale_cart must be > 0");
  check(action_scale_joint > 0.0, "action_scale_joint must be > 0");
  check(success_radius > 0.0, "success_radius must be > 0");
  check(target_region.valid(), "target_region: min must be <= max");
  check(obstacle_region.valid(), "obstacle_region: min must be <= max");
  check(table.valid(), "table: min must be <= max");
  check((obstacle_size.array() > 0.0).all(), "obstacle_size must be positive");
}

ArmModel default_panda_model() {
  // Alternating vertical / pitch axes; 0.85 m from joint 0 to the tip.
  ArmModel arm;
  const double lengths[7] = {0.05, 0.10, 0.20, 0.15, 0.15, 0.10, 0.05};
  for (int i = 0; i < 7; ++i) {
    JointSpec j;
    j.axis = (i % 2 == 0) ? Vec3::UnitZ() : Vec3::UnitY();
    j.origin = Vec3(0.0, 0.0, lengths[i]);
    j.limit_lo = -2.9;
    j.limit_hi = 2.9;
    j.collision_radius = 0.05;
    arm.joints.push_back(j);
  }
  arm.tip_offset = Vec3(0.0, 0.0, 0.05);
  return arm;
}

double compute_reward(const Vec3& tip, const Vec3& target) {
  require(tip.allFinite() && target.allFinite(), "reward inputs must be finite");
  return -(tip - target).norm();
}

ReachEnv::ReachEnv(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  radii_ = config_.arm.collision_radii();
  q_ = JointVector::Zero(static_cast<Eigen::Index>(config_.arm.dof()));
  frames_ = forward_kinematics(config_.arm, q_);
  target_ = config_.target_region.center();
  obstacle_ = Aabb::centered(config_.obstacle_region.center(), config_.obstacle_size);
}

std::size_t ReachEnv::obs_dim() const {
  return config_.action_repr == ActionRepr::kCartesian ? 9 : config_.arm.dof() + 9;
}

std::size_t ReachEnv::act_dim() const {
  return config_.action_repr == ActionRepr::kCartesian ? 3 : config_.arm.dof();
}

Eigen::VectorXd ReachEnv::observation() const {
  Eigen::VectorXd obs(static_cast<Eigen::Index>(obs_dim()));
  Eigen::Index k = 0;
  if (config_.action_repr == ActionRepr::kJoint) {
    obs.head(q_.size()) = q_;
    k = q_.size();
  }
  obs.segment<3>(k) = frames_.tip;
  obs.segment<3>(k + 3) = target_;
  obs.segment<3>(k + 6) = obstacle_.center();
  return obs;
}

bool ReachEnv::obstacle_is_between(const Vec3& center) const {
  const Vec3 base = config_.arm.base_pose.translation();
  const Eigen::Vector2d to_target = (target_ - base).head<2>();
  const double range = to_target.norm();
  if (range <= 0.0) return false;
  const Eigen::Vector2d bearing = to_target / range;
  const Eigen::Vector2d rel = (center - base).head<2>();
  const double along = rel.dot(bearing);
  const double lateral = std::abs(rel.x() * bearing.y() - rel.y() * bearing.x());
  const double half_width = 0.5 * std::min(config_.obstacle_size.x(), config_.obstacle_size.y());
  return along > 0.0 && along < range && lateral <= half_width;
}

void ReachEnv::place_task(Rng& rng) {
  target_ = sample_in(config_.target_region, rng);
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    const Vec3 center = sample_in(config_.obstacle_region, rng);
    const Aabb box = Aabb::centered(center, config_.obstacle_size);
    if (!box.contains(target_) && obstacle_is_between(center)) {
      obstacle_ = box;
      return;
    }
  }
  throw ConfigError(fmt::format(
      "could not place the obstacle after {} attempts; target and obstacle regions are "
      "incompatible",
      kMaxPlacementAttempts));
}

Eigen::VectorXd ReachEnv::reset(Rng& rng) {
  q_ = JointVector::Zero(static_cast<Eigen::Index>(config_.arm.dof()));
  frames_ = forward_kinematics(config_.arm, q_);
  place_task(rng);
  steps_ = 0;
  return observation();
}

StepResult ReachEnv::step(const Eigen::VectorXd& action) {
  if (static_cast<std::size_t>(action.size()) != act_dim()) {
    throw ContractViolation(
        fmt::format("action has {} entries, expected {}", action.size(), act_dim()));
  }
  require(action.allFinite(), "action contains NaN or Inf");
  const Eigen::VectorXd a = action.cwiseMax(-1.0).cwiseMin(1.0);

  if (config_.action_repr == ActionRepr::kCartesian) {
    const Vec3 desired = frames_.tip + config_.action_scale_cart * a;
    q_ = solve_ik_delta(config_.arm, q_, desired);
  } else {
    q_ = clamp_joints(config_.arm, q_ + config_.action_scale_joint * a);
  }
  frames_ = forward_kinematics(config_.arm, q_);
  ++steps_;

  const Aabb obstacles[1] = {obstacle_};
  const ArmContact contact = arm_obstacle_query(frames_, radii_, obstacles);

  StepResult out;
  out.reward = compute_reward(frames_.tip, target_);
  out.cost = contact.any_collision ? 1.0 : 0.0;
  out.info.distance = -out.reward;
  out.info.min_clearance = contact.min_clearance;
  out.info.success = out.info.distance < config_.success_radius;
  out.info.truncated = !out.info.success && steps_ >= config_.max_episode_steps;
  out.done = out.info.success || out.info.truncated;
  out.obs = observation();
  return out;
}

bool ReachEnv::table_contact() const {
  const Aabb slab[1] = {config_.table};
  return arm_obstacle_query(frames_, radii_, slab).any_collision;
}

void ReachEnv::set_task(const Vec3& target, const Vec3& obstacle_center) {
  require(target.allFinite() && obstacle_center.allFinite(), "task positions must be finite");
  target_ = target;
  obstacle_ = Aabb::centered(obstacle_center, config_.obstacle_size);
}

void ReachEnv::set_joints(const JointVector& q) {
  q_ = clamp_joints(config_.arm, q);
  frames_ = forward_kinematics(config_.arm, q_);
}

}  // namespace safe_arm
