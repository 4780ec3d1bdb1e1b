#pragma once

#include "safe_arm/collision.hpp"
#include "safe_arm/kinematics.hpp"
#include "safe_arm/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>

namespace safe_arm {

// AR1: Cartesian tip deltas resolved by IK. AR2: direct joint-angle deltas.
enum class ActionRepr { kCartesian, kJoint };

std::string to_string(ActionRepr repr);  // "ar1" / "ar2"
ActionRepr action_repr_from_string(const std::string& s);

struct StepInfo {
  double distance = 0.0;  // tip to target (m)
  double min_clearance = 0.0;
  bool success = false;
  bool truncated = false;
};

struct StepResult {
  Eigen::VectorXd obs;
  double reward = 0.0;
  double cost = 0.0;  // 1 while the arm touches the obstacle, else 0
  bool done = false;
  StepInfo info;
};

// Gym-style episodic interface consumed by the rollout collector.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual std::size_t obs_dim() const = 0;
  virtual std::size_t act_dim() const = 0;
  virtual Eigen::VectorXd reset(Rng& rng) = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
};

struct EnvConfig {
  ArmModel arm;
  ActionRepr action_repr = ActionRepr::kCartesian;
  int max_episode_steps = 500;
  double action_scale_cart = 0.05;
  double action_scale_joint = 0.05;
  double success_radius = 0.05;
  Aabb target_region{{0.3, -0.1, 0.05}, {0.5, 0.1, 0.25}};
  Aabb obstacle_region{{0.1, -0.15, 0.05}, {0.3, 0.15, 0.15}};
  Vec3 obstacle_size{0.1, 0.1, 0.1};
  // Thin slab under the arm. Touching it is reported but costs nothing.
  Aabb table{{-1.0, -1.0, -0.02}, {1.0, 1.0, 0.0}};
  std::uint64_t seed = 0;

  void validate() const;
};

// Built-in 7-DoF arm used when a config does not name a model file.
ArmModel default_panda_model();

double compute_reward(const Vec3& tip, const Vec3& target);

// Reach-a-target task with one box obstacle placed between the arm base and
// the target.
class ReachEnv final : public Environment {
 public:
  explicit ReachEnv(EnvConfig config);

  std::size_t obs_dim() const override;
  std::size_t act_dim() const override;
  Eigen::VectorXd reset(Rng& rng) override;
  StepResult step(const Eigen::VectorXd& action) override;

  const EnvConfig& config() const { return config_; }
  const JointVector& joints() const { return q_; }
  const Vec3& target() const { return target_; }
  const Aabb& obstacle() const { return obstacle_; }
  const Vec3& tip() const { return frames_.tip; }
  const LinkFrames& frames() const { return frames_; }
  int steps_taken() const { return steps_; }
  bool table_contact() const;

  // Overrides the sampled task; used by scripted tests.
  void set_task(const Vec3& target, const Vec3& obstacle_center);
  void set_joints(const JointVector& q);

  Eigen::VectorXd observation() const;

 private:
  void place_task(Rng& rng);
  bool obstacle_is_between(const Vec3& center) const;

  EnvConfig config_;
  std::vector<double> radii_;
  JointVector q_;
  LinkFrames frames_;
  Vec3 target_ = Vec3::Zero();
  Aabb obstacle_;
  int steps_ = 0;
};

}  // namespace safe_arm
