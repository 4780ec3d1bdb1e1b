#include "safe_arm/rl.hpp"

#include "safe_arm/errors.hpp"
#include "safe_arm/json_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace safe_arm {

namespace {

double predict_scalar(const MlpParams& net, const Eigen::VectorXd& obs) {
  return mlp_predict(net, obs)(0, 0);
}

std::vector<int> layer_sizes(std::size_t in, const std::vector<int>& hidden, std::size_t out) {
  std::vector<int> sizes;
  sizes.push_back(static_cast<int>(in));
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(static_cast<int>(out));
  return sizes;
}

double approx_kl(const GaussianPolicy& policy, const Eigen::MatrixXd& obs,
                 const Eigen::MatrixXd& actions, const Eigen::VectorXd& log_prob_old) {
  const PolicyBatchEval eval = gaussian_log_prob_batch(policy, obs, actions);
  return (log_prob_old - eval.log_prob).mean();
}

}  // namespace

std::string to_string(Algorithm algo) { return algo == Algorithm::kPpo ? "ppo" : "cppo"; }

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "ppo" || s == "PPO") return Algorithm::kPpo;
  if (s == "cppo" || s == "cPPO" || s == "CPPO") return Algorithm::kCppo;
  throw ConfigError(fmt::format("unknown algorithm '{}' (expected ppo or cppo)", s));
}

void TrainerConfig::validate() const {
  auto check = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  check(gamma > 0.0 && gamma <= 1.0, "gamma must be in (0, 1]");
  check(gae_lambda >= 0.0 && gae_lambda <= 1.0, "gae_lambda must be in [0, 1]");
  check(clip_eps > 0.0 && clip_eps < 1.0, "clip_eps must be in (0, 1)");
  check(policy_lr > 0.0 && value_lr > 0.0, "learning rates must be > 0");
  check(minibatch_size > 0, "minibatch_size must be > 0");
  check(update_passes > 0, "update_passes must be > 0");
  check(target_kl > 0.0, "target_kl must be > 0");
  check(steps_per_epoch > 0, "steps_per_epoch must be > 0");
  check(max_epochs > 0, "max_epochs must be > 0");
  check(!hidden_sizes.empty(), "hidden_sizes must not be empty");
  for (int h : hidden_sizes) check(h > 0, "hidden layer sizes must be > 0");
  check(cost_limit >= 0.0, "cost_limit must be >= 0");
  check(dual_lr > 0.0, "dual_lr must be > 0");
  check(lambda_init >= 0.0, "lambda_init must be >= 0");
}

LagrangeState lambda_update(const LagrangeState& state, double mean_episode_cost) {
  require(mean_episode_cost >= 0.0 && std::isfinite(mean_episode_cost),
          "mean episode cost must be finite and non-negative");
  LagrangeState next = state;
  next.lambda = std::max(0.0, state.lambda + state.dual_lr * (mean_episode_cost - state.cost_limit));
  return next;
}

EpisodeStats RolloutBuffer::mean_episode() const {
  if (episodes.empty()) return unfinished.value_or(EpisodeStats{});
  EpisodeStats mean;
  double len = 0.0;
  int successes = 0;
  for (const auto& e : episodes) {
    mean.reward += e.reward;
    mean.cost += e.cost;
    len += e.length;
    successes += e.success ? 1 : 0;
  }
  const double n = static_cast<double>(episodes.size());
  mean.reward /= n;
  mean.cost /= n;
  mean.length = static_cast<int>(std::lround(len / n));
  mean.success = 2 * successes >= static_cast<int>(episodes.size());
  return mean;
}

RolloutBuffer collect_rollout(const GaussianPolicy& policy, const Critics& critics, Environment& env,
                              int steps, Rng& env_rng, Rng& action_rng) {
  require(steps > 0, "rollout needs at least one step");
  require(static_cast<Eigen::Index>(env.obs_dim()) == policy.obs_dim() &&
              static_cast<Eigen::Index>(env.act_dim()) == policy.act_dim(),
          "policy shape does not match the environment");
  const auto n = static_cast<Eigen::Index>(steps);
  RolloutBuffer buf;
  buf.obs.resize(policy.obs_dim(), n);
  buf.actions.resize(policy.act_dim(), n);
  buf.log_prob.resize(n);
  buf.reward.resize(n);
  buf.cost.resize(n);
  buf.value_r.resize(n);
  buf.value_c.resize(n);
  buf.done.assign(static_cast<std::size_t>(steps), 0);

  Eigen::VectorXd obs = env.reset(env_rng);
  EpisodeStats ep;
  std::size_t path_begin = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const PolicySample sample = gaussian_sample(policy, obs, action_rng);
    buf.obs.col(t) = obs;
    buf.actions.col(t) = sample.action;
    buf.log_prob[t] = sample.log_prob;
    buf.value_r[t] = predict_scalar(critics.reward, obs);
    buf.value_c[t] = predict_scalar(critics.cost, obs);

    const StepResult res = env.step(sample.action);
    buf.reward[t] = res.reward;
    buf.cost[t] = res.cost;
    buf.done[static_cast<std::size_t>(t)] = res.done ? 1 : 0;
    ep.reward += res.reward;
    ep.cost += res.cost;
    ep.length += 1;

    const bool rollout_end = t + 1 == n;
    if (res.done || rollout_end) {
      PathSegment path;
      path.begin = path_begin;
      path.end = static_cast<std::size_t>(t) + 1;
      path.terminal = res.done && res.info.success;
      if (!path.terminal) {
        path.bootstrap_r = predict_scalar(critics.reward, res.obs);
        path.bootstrap_c = predict_scalar(critics.cost, res.obs);
      }
      buf.paths.push_back(path);
      path_begin = path.end;
      if (res.done) {
        ep.success = res.info.success;
        buf.episodes.push_back(ep);
      } else {
        buf.unfinished = ep;
      }
      ep = EpisodeStats{};
      if (res.done && !rollout_end) obs = env.reset(env_rng);
    } else {
      obs = res.obs;
    }
  }
  return buf;
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap_value, double gamma,
                      double lam) {
  require(rewards.size() == values.size() && rewards.size() == dones.size(),
          "GAE inputs must have equal lengths");
  const std::size_t n = rewards.size();
  GaeResult out{Eigen::VectorXd(static_cast<Eigen::Index>(n)),
                Eigen::VectorXd(static_cast<Eigen::Index>(n))};
  double next_value = bootstrap_value;
  double next_adv = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double live = dones[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * live - values[i];
    const double adv = delta + gamma * lam * live * next_adv;
    out.advantages[static_cast<Eigen::Index>(i)] = adv;
    out.returns[static_cast<Eigen::Index>(i)] = adv + values[i];
    next_value = values[i];
    next_adv = adv;
  }
  return out;
}

void compute_advantages(RolloutBuffer& buffer, double gamma, double lam) {
  require(!buffer.advantages_ready, "advantages were already computed for this rollout");
  const auto n = static_cast<Eigen::Index>(buffer.size());
  buffer.adv_r.resize(n);
  buffer.adv_c.resize(n);
  buffer.ret_r.resize(n);
  buffer.ret_c.resize(n);
  for (const PathSegment& p : buffer.paths) {
    const std::size_t len = p.end - p.begin;
    // Only a success ends the value recursion; truncated paths bootstrap.
    std::vector<std::uint8_t> dones(len, 0);
    dones.back() = p.terminal ? 1 : 0;
    const auto b = static_cast<Eigen::Index>(p.begin);
    const auto l = static_cast<Eigen::Index>(len);
    auto seg = [&](const Eigen::VectorXd& v) {
      return std::span<const double>(v.data() + b, len);
    };
    const GaeResult r = compute_gae(seg(buffer.reward), seg(buffer.value_r), dones, p.bootstrap_r,
                                    gamma, lam);
    const GaeResult c = compute_gae(seg(buffer.cost), seg(buffer.value_c), dones, p.bootstrap_c,
                                    gamma, lam);
    buffer.adv_r.segment(b, l) = r.advantages;
    buffer.ret_r.segment(b, l) = r.returns;
    buffer.adv_c.segment(b, l) = c.advantages;
    buffer.ret_c.segment(b, l) = c.returns;
  }
  buffer.advantages_ready = true;
}

Eigen::VectorXd penalized_advantage(const Eigen::VectorXd& adv_r, const Eigen::VectorXd& adv_c,
                                    double lambda) {
  require(adv_r.size() == adv_c.size(), "advantage vectors must have equal lengths");
  require(lambda >= 0.0, "lambda must be non-negative");
  if (lambda == 0.0) return adv_r;
  return (adv_r - lambda * adv_c) / (1.0 + lambda);
}

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& adv) {
  require(adv.size() > 0, "cannot normalize an empty advantage vector");
  const double mean = adv.mean();
  const Eigen::VectorXd centered = adv.array() - mean;
  const double std = std::sqrt(centered.squaredNorm() / static_cast<double>(adv.size()));
  return centered / std::max(std, 1e-8);
}

PolicyLoss ppo_policy_loss(const PolicyBatch& batch, const GaussianPolicy& policy, double clip_eps) {
  const Eigen::Index n = batch.obs.cols();
  require(n > 0, "empty policy batch");
  require(batch.actions.cols() == n && batch.log_prob_old.size() == n && batch.advantages.size() == n,
          "policy batch columns disagree");
  const PolicyBatchEval eval = gaussian_log_prob_batch(policy, batch.obs, batch.actions);
  Eigen::VectorXd weights(n);
  double surrogate = 0.0;
  int clipped = 0;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double ratio = std::exp(eval.log_prob[j] - batch.log_prob_old[j]);
    const double a = batch.advantages[j];
    const double unclipped = ratio * a;
    const double clipped_term = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * a;
    if (unclipped <= clipped_term) {
      surrogate += unclipped;
      // d(rho A)/d log p = rho A
      weights[j] = -unclipped * inv_n;
    } else {
      surrogate += clipped_term;
      weights[j] = 0.0;
    }
    if (std::abs(ratio - 1.0) > clip_eps) ++clipped;
  }
  PolicyLoss out;
  out.loss = -surrogate * inv_n;
  out.grad = gaussian_log_prob_backward(policy, eval, batch.actions, weights);
  out.approx_kl = (batch.log_prob_old - eval.log_prob).mean();
  out.clip_fraction = static_cast<double>(clipped) * inv_n;
  return out;
}

ValueLoss value_loss(const MlpParams& net, const Eigen::MatrixXd& obs, const Eigen::VectorXd& targets) {
  require(net.out_dim() == 1, "value network must have a scalar output");
  require(obs.cols() == targets.size() && targets.size() > 0, "value batch columns disagree");
  auto [pred, cache] = mlp_forward(net, obs);
  const Eigen::RowVectorXd diff = pred.row(0) - targets.transpose();
  const double inv_n = 1.0 / static_cast<double>(targets.size());
  ValueLoss out;
  out.loss = diff.squaredNorm() * inv_n;
  out.grad = mlp_backward(net, cache, 2.0 * inv_n * diff).flat();
  return out;
}

Trainer::Trainer(TrainerConfig config, std::size_t obs_dim, std::size_t act_dim, std::uint64_t seed)
    : config_(std::move(config)) {
  config_.validate();
  const Rng root(seed);
  Rng init_rng = root.split(0);
  env_rng_ = root.split(1);
  action_rng_ = root.split(2);
  shuffle_rng_ = root.split(3);

  const auto policy_sizes = layer_sizes(obs_dim, config_.hidden_sizes, act_dim);
  const auto value_sizes = layer_sizes(obs_dim, config_.hidden_sizes, 1);
  policy_ = make_policy(policy_sizes, init_rng, config_.init_log_std);
  critics_.reward = make_mlp(value_sizes, init_rng, 1.0);
  critics_.cost = make_mlp(value_sizes, init_rng, 1.0);
  policy_opt_ = AdamState(policy_.param_count());
  value_opt_ = AdamState(critics_.reward.param_count());
  cost_opt_ = AdamState(critics_.cost.param_count());
  if (config_.algorithm == Algorithm::kCppo) {
    lagrange_ = LagrangeState{config_.lambda_init, config_.cost_limit, config_.dual_lr};
  }
}

std::string Trainer::diagnostic_dump(const EpochMetrics& m) const {
  const Eigen::VectorXd p = policy_.flat();
  const json dump = {
      {"epoch", m.epoch},
      {"lambda", lagrange_ ? lagrange_->lambda : 0.0},
      {"policy_loss", std::isfinite(m.policy_loss) ? json(m.policy_loss) : json("non-finite")},
      {"value_loss", std::isfinite(m.value_loss) ? json(m.value_loss) : json("non-finite")},
      {"cost_value_loss",
       std::isfinite(m.cost_value_loss) ? json(m.cost_value_loss) : json("non-finite")},
      {"policy_param_norm", p.allFinite() ? json(p.norm()) : json("non-finite")},
      {"log_std", std::vector<double>(policy_.log_std.data(),
                                      policy_.log_std.data() + policy_.log_std.size())},
  };
  return dump.dump();
}

EpochMetrics Trainer::train_epoch(Environment& env) {
  RolloutBuffer buf = collect_rollout(policy_, critics_, env, config_.steps_per_epoch, env_rng_,
                                      action_rng_);
  compute_advantages(buf, config_.gamma, config_.gae_lambda);

  EpochMetrics m;
  m.epoch = epoch_ + 1;
  const EpisodeStats mean = buf.mean_episode();
  m.mean_ep_reward = mean.reward;
  m.mean_ep_cost = mean.cost;
  if (buf.episodes.empty()) {
    m.mean_ep_len = static_cast<double>(buf.unfinished ? buf.unfinished->length : 0);
  } else {
    double len = 0.0;
    int succ = 0;
    for (const auto& e : buf.episodes) {
      len += e.length;
      succ += e.success ? 1 : 0;
    }
    m.mean_ep_len = len / static_cast<double>(buf.episodes.size());
    m.success_rate = static_cast<double>(succ) / static_cast<double>(buf.episodes.size());
  }
  m.episodes = static_cast<int>(buf.episodes.size());

  Eigen::VectorXd adv = buf.adv_r;
  if (lagrange_) {
    if (!config_.pin_lambda) *lagrange_ = lambda_update(*lagrange_, m.mean_ep_cost);
    adv = penalized_advantage(buf.adv_r, buf.adv_c, lagrange_->lambda);
    m.lambda = lagrange_->lambda;
  }
  adv = normalize_advantages(adv);

  const PolicyBatch full{buf.obs, buf.actions, buf.log_prob, adv};
  m.policy_loss = ppo_policy_loss(full, policy_, config_.clip_eps).loss;
  m.value_loss = value_loss(critics_.reward, buf.obs, buf.ret_r).loss;
  m.cost_value_loss = value_loss(critics_.cost, buf.obs, buf.ret_c).loss;
  auto guard = [&](double v) {
    if (!std::isfinite(v)) {
      throw TrainingDiverged(
          fmt::format("non-finite loss at epoch {}: {}", m.epoch, diagnostic_dump(m)));
    }
  };
  guard(m.policy_loss);
  guard(m.value_loss);
  guard(m.cost_value_loss);

  const auto n = static_cast<Eigen::Index>(buf.size());
  const auto mb = static_cast<Eigen::Index>(config_.minibatch_size);
  bool policy_active = true;
  for (int pass = 0; pass < config_.update_passes; ++pass) {
    if (policy_active && pass > 0) {
      m.kl = approx_kl(policy_, buf.obs, buf.actions, buf.log_prob);
      if (m.kl >= config_.target_kl) policy_active = false;
    }
    if (policy_active) m.policy_passes = pass + 1;
    const std::vector<std::size_t> perm = shuffle_rng_.permutation(static_cast<std::size_t>(n));
    for (Eigen::Index start = 0; start < n; start += mb) {
      const Eigen::Index len = std::min(mb, n - start);
      const std::vector<std::size_t> idx(perm.begin() + start, perm.begin() + start + len);
      const Eigen::MatrixXd obs = buf.obs(Eigen::all, idx);
      if (policy_active) {
        const PolicyBatch batch{obs, buf.actions(Eigen::all, idx), buf.log_prob(idx), adv(idx)};
        const PolicyLoss pl = ppo_policy_loss(batch, policy_, config_.clip_eps);
        guard(pl.loss);
        Eigen::VectorXd flat = policy_.flat();
        adam_update(policy_opt_, flat, pl.grad, config_.policy_lr);
        policy_.set_flat(flat);
      }
      const ValueLoss vl = value_loss(critics_.reward, obs, buf.ret_r(idx));
      guard(vl.loss);
      Eigen::VectorXd vflat = critics_.reward.flat();
      adam_update(value_opt_, vflat, vl.grad, config_.value_lr);
      critics_.reward.set_flat(vflat);

      const ValueLoss cl = value_loss(critics_.cost, obs, buf.ret_c(idx));
      guard(cl.loss);
      Eigen::VectorXd cflat = critics_.cost.flat();
      adam_update(cost_opt_, cflat, cl.grad, config_.value_lr);
      critics_.cost.set_flat(cflat);
    }
  }
  if (policy_active) m.kl = approx_kl(policy_, buf.obs, buf.actions, buf.log_prob);
  guard(m.kl);
  ++epoch_;
  return m;
}

std::vector<NamedTensor> Trainer::checkpoint() const {
  std::vector<NamedTensor> out = mlp_tensors("policy/mean", policy_.mean_net);
  out.push_back({"policy/log_std", policy_.log_std});
  for (auto& t : mlp_tensors("value", critics_.reward)) out.push_back(std::move(t));
  for (auto& t : mlp_tensors("cost_value", critics_.cost)) out.push_back(std::move(t));
  Eigen::MatrixXd lambda(1, 1);
  lambda(0, 0) = lagrange_ ? lagrange_->lambda : 0.0;
  out.push_back({"lagrange/lambda", lambda});
  return out;
}

void Trainer::restore(const std::vector<NamedTensor>& tensors) {
  assign_mlp_tensors("policy/mean", tensors, policy_.mean_net);
  assign_mlp_tensors("value", tensors, critics_.reward);
  assign_mlp_tensors("cost_value", tensors, critics_.cost);
  for (const auto& t : tensors) {
    if (t.name == "policy/log_std") {
      if (t.value.size() != policy_.log_std.size()) throw ConfigError("log_std shape mismatch");
      policy_.log_std = t.value.reshaped();
    } else if (t.name == "lagrange/lambda" && lagrange_) {
      lagrange_->lambda = t.value(0, 0);
    }
  }
}

}  // namespace safe_arm
