#pragma once

#include "safe_arm/env.hpp"
#include "safe_arm/neural.hpp"
#include "safe_arm/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace safe_arm {

enum class Algorithm { kPpo, kCppo };

std::string to_string(Algorithm algo);  // "ppo" / "cppo"
Algorithm algorithm_from_string(const std::string& s);

struct TrainerConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double policy_lr = 3e-4;
  double value_lr = 1e-3;
  int minibatch_size = 64;
  int update_passes = 10;
  double target_kl = 0.015;
  int steps_per_epoch = 1000;
  int max_epochs = 200;
  std::vector<int> hidden_sizes{64, 64};
  double init_log_std = -0.5;
  Algorithm algorithm = Algorithm::kPpo;
  // cPPO only.
  double cost_limit = 10.0;
  double dual_lr = 0.05;
  double lambda_init = 0.0;
  // Freezes lambda at lambda_init; used to check the PPO reduction.
  bool pin_lambda = false;

  void validate() const;
};

// Dual variable of the cost constraint J_c(pi) <= cost_limit.
struct LagrangeState {
  double lambda = 0.0;
  double cost_limit = 10.0;
  double dual_lr = 0.05;
};

// Projected dual ascent: lambda <- max(0, lambda + dual_lr * (cost - limit)).
LagrangeState lambda_update(const LagrangeState& state, double mean_episode_cost);

struct EpisodeStats {
  double reward = 0.0;
  double cost = 0.0;
  int length = 0;
  bool success = false;
};

// Contiguous run of steps from one episode inside a rollout.
struct PathSegment {
  std::size_t begin = 0;
  std::size_t end = 0;     // one past the last step
  bool terminal = false;   // ended by success; no bootstrap
  double bootstrap_r = 0.0;
  double bootstrap_c = 0.0;
};

struct RolloutBuffer {
  Eigen::MatrixXd obs;      // obs_dim x steps
  Eigen::MatrixXd actions;  // act_dim x steps, unclipped policy samples
  Eigen::VectorXd log_prob;
  Eigen::VectorXd reward;
  Eigen::VectorXd cost;
  Eigen::VectorXd value_r;
  Eigen::VectorXd value_c;
  std::vector<std::uint8_t> done;  // episode ended at this step (success or truncation)
  std::vector<PathSegment> paths;
  std::vector<EpisodeStats> episodes;  // episodes that finished inside the rollout
  std::optional<EpisodeStats> unfinished;

  Eigen::VectorXd adv_r, adv_c, ret_r, ret_c;
  bool advantages_ready = false;

  std::size_t size() const { return static_cast<std::size_t>(reward.size()); }
  // Mean over finished episodes, falling back to the unfinished one.
  EpisodeStats mean_episode() const;
};

struct Critics {
  MlpParams reward;
  MlpParams cost;
};

// Resets `env`, then runs the policy for exactly `steps` steps, resetting on
// done. Episodes cut off by the rollout end are bootstrapped from the critics.
RolloutBuffer collect_rollout(const GaussianPolicy& policy, const Critics& critics, Environment& env,
                              int steps, Rng& env_rng, Rng& action_rng);

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;
};

// delta_t = r_t + gamma v_{t+1} (1 - done_t) - v_t,
// A_t = delta_t + gamma lam (1 - done_t) A_{t+1}; v_T = bootstrap_value.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lam);

// Fills adv_r/adv_c/ret_r/ret_c path by path. Throws if already computed.
void compute_advantages(RolloutBuffer& buffer, double gamma, double lam);

// (adv_r - lambda adv_c) / (1 + lambda). Returns adv_r unchanged at lambda = 0.
Eigen::VectorXd penalized_advantage(const Eigen::VectorXd& adv_r, const Eigen::VectorXd& adv_c,
                                    double lambda);

// Mean 0, std 1; the std is floored at 1e-8.
Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& adv);

struct PolicyBatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd actions;
  Eigen::VectorXd log_prob_old;
  Eigen::VectorXd advantages;
};

struct PolicyLoss {
  double loss = 0.0;
  Eigen::VectorXd grad;  // GaussianPolicy::flat() layout
  double approx_kl = 0.0;
  double clip_fraction = 0.0;
};

// -mean(min(rho A, clip(rho, 1 - eps, 1 + eps) A)) and its exact gradient.
PolicyLoss ppo_policy_loss(const PolicyBatch& batch, const GaussianPolicy& policy, double clip_eps);

struct ValueLoss {
  double loss = 0.0;
  Eigen::VectorXd grad;  // MlpParams::flat() layout
};

// mean((v(obs) - targets)^2).
ValueLoss value_loss(const MlpParams& net, const Eigen::MatrixXd& obs, const Eigen::VectorXd& targets);

struct EpochMetrics {
  int epoch = 0;
  double mean_ep_reward = 0.0;
  double mean_ep_cost = 0.0;
  double mean_ep_len = 0.0;
  double lambda = 0.0;
  double kl = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double cost_value_loss = 0.0;
  int episodes = 0;
  double success_rate = 0.0;
  int policy_passes = 0;
};

// Owns the networks, optimizers, dual variable, and RNG streams of one run.
class Trainer {
 public:
  Trainer(TrainerConfig config, std::size_t obs_dim, std::size_t act_dim, std::uint64_t seed);

  EpochMetrics train_epoch(Environment& env);

  const TrainerConfig& config() const { return config_; }
  const GaussianPolicy& policy() const { return policy_; }
  const Critics& critics() const { return critics_; }
  const std::optional<LagrangeState>& lagrange() const { return lagrange_; }
  int epochs_completed() const { return epoch_; }

  std::vector<NamedTensor> checkpoint() const;
  void restore(const std::vector<NamedTensor>& tensors);

 private:
  std::string diagnostic_dump(const EpochMetrics& m) const;

  TrainerConfig config_;
  GaussianPolicy policy_;
  Critics critics_;
  AdamState policy_opt_, value_opt_, cost_opt_;
  std::optional<LagrangeState> lagrange_;
  Rng env_rng_;
  Rng action_rng_;
  Rng shuffle_rng_;
  int epoch_ = 0;
};

}  // namespace safe_arm
