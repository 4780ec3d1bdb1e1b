#include "safe_arm/checks.hpp"

#include "safe_arm/rl.hpp"

#include <fmt/format.h>

#include <cmath>

namespace safe_arm::checks {

namespace {

constexpr double kFdStep = 1e-5;
constexpr double kGradTolerance = 1e-4;
constexpr double kGaeTolerance = 1e-12;

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  return m;
}

std::vector<int> random_shape(Rng& rng, int instance) {
  // Every fourth instance uses a shape the trainer actually builds.
  if (instance % 4 == 3) {
    const int obs = rng.uniform() < 0.5 ? 9 : 16;
    const int out = std::array<int, 3>{1, 3, 7}[rng.below(3)];
    return {obs, 64, 64, out};
  }
  std::vector<int> sizes{static_cast<int>(1 + rng.below(6))};
  const int hidden = static_cast<int>(1 + rng.below(3));
  for (int h = 0; h < hidden; ++h) sizes.push_back(static_cast<int>(2 + rng.below(7)));
  sizes.push_back(static_cast<int>(1 + rng.below(4)));
  return sizes;
}

GaussianPolicy random_policy(std::span<const int> sizes, Rng& rng) {
  GaussianPolicy p;
  p.mean_net = random_mlp(sizes, rng);
  p.log_std.resize(sizes.back());
  for (Eigen::Index i = 0; i < p.log_std.size(); ++i) p.log_std[i] = rng.uniform(-1.0, 0.5);
  return p;
}

}  // namespace

double relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  return (analytic - numeric).norm() / std::max(analytic.norm() + numeric.norm(), 1e-12);
}

Eigen::VectorXd numeric_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                 const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

MlpParams random_mlp(std::span<const int> sizes, Rng& rng) {
  MlpParams p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer layer;
    layer.weight = random_matrix(sizes[l + 1], sizes[l], rng, 1.0 / std::sqrt(sizes[l]));
    layer.bias = random_matrix(sizes[l + 1], 1, rng, 0.1);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

Eigen::VectorXd brute_force_gae(const std::vector<double>& rewards, const std::vector<double>& values,
                                const std::vector<std::uint8_t>& dones, double bootstrap,
                                double gamma, double lam) {
  const std::size_t n = rewards.size();
  std::vector<double> delta(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = (t + 1 < n) ? values[t + 1] : bootstrap;
    delta[t] = rewards[t] + (dones[t] ? 0.0 : gamma * next) - values[t];
  }
  Eigen::VectorXd adv(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    double sum = 0.0;
    double weight = 1.0;
    for (std::size_t k = t; k < n; ++k) {
      sum += weight * delta[k];
      if (dones[k]) break;
      weight *= gamma * lam;
    }
    adv[static_cast<Eigen::Index>(t)] = sum;
  }
  return adv;
}

CheckResult check_mlp_gradients(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const std::vector<int> sizes = random_shape(rng, k);
    MlpParams net = random_mlp(sizes, rng);
    const Eigen::MatrixXd x = random_matrix(sizes.front(), 3, rng);
    const Eigen::MatrixXd gy = random_matrix(sizes.back(), 3, rng);

    auto [y, cache] = mlp_forward(net, x);
    const MlpGrads grads = mlp_backward(net, cache, gy);

    const Eigen::VectorXd theta = net.flat();
    auto f_params = [&](const Eigen::VectorXd& p) {
      MlpParams probe = net;
      probe.set_flat(p);
      return (mlp_predict(probe, x).array() * gy.array()).sum();
    };
    worst = std::max(worst, relative_error(grads.flat(), numeric_gradient(f_params, theta, kFdStep)));

    const Eigen::VectorXd xin = x.reshaped();
    auto f_input = [&](const Eigen::VectorXd& v) {
      const Eigen::MatrixXd probe = v.reshaped(x.rows(), x.cols());
      return (mlp_predict(net, probe).array() * gy.array()).sum();
    };
    const Eigen::VectorXd ginput = grads.input.reshaped();
    worst = std::max(worst, relative_error(ginput, numeric_gradient(f_input, xin, kFdStep)));
  }
  return {"mlp_backward vs finite differences", worst < kGradTolerance,
          fmt::format("{} instances, worst relative error {:.3e} (limit {:.0e})", instances, worst,
                      kGradTolerance)};
}

CheckResult check_log_prob_gradients(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const std::vector<int> sizes = random_shape(rng, k);
    const GaussianPolicy policy = random_policy(sizes, rng);
    const int batch = 4;
    const Eigen::MatrixXd obs = random_matrix(sizes.front(), batch, rng);
    const Eigen::MatrixXd act = random_matrix(sizes.back(), batch, rng);
    const Eigen::VectorXd w = random_matrix(batch, 1, rng);

    const PolicyBatchEval eval = gaussian_log_prob_batch(policy, obs, act);
    const Eigen::VectorXd analytic = gaussian_log_prob_backward(policy, eval, act, w);
    auto f = [&](const Eigen::VectorXd& p) {
      GaussianPolicy probe = policy;
      probe.set_flat(p);
      double total = 0.0;
      for (int j = 0; j < batch; ++j) total += w[j] * gaussian_log_prob(probe, obs.col(j), act.col(j));
      return total;
    };
    worst = std::max(worst, relative_error(analytic, numeric_gradient(f, policy.flat(), kFdStep)));
  }
  return {"gaussian log-prob gradient vs finite differences", worst < kGradTolerance,
          fmt::format("{} instances, worst relative error {:.3e} (limit {:.0e})", instances, worst,
                      kGradTolerance)};
}

CheckResult check_surrogate_gradients(int instances, std::uint64_t seed) {
  Rng rng(seed);
  const double clip = 0.2;
  double worst = 0.0;
  int clipped_samples = 0;
  for (int k = 0; k < instances; ++k) {
    const std::vector<int> sizes = random_shape(rng, k);
    const GaussianPolicy policy = random_policy(sizes, rng);
    const int batch = 8;
    PolicyBatch b;
    b.obs = random_matrix(sizes.front(), batch, rng);
    b.actions = random_matrix(sizes.back(), batch, rng);
    b.advantages = random_matrix(batch, 1, rng);
    const Eigen::VectorXd logp = gaussian_log_prob_batch(policy, b.obs, b.actions).log_prob;
    b.log_prob_old.resize(batch);
    for (int j = 0; j < batch; ++j) {
      // Keep ratios away from the clip kinks so central differences stay on
      // one side of them.
      double shift = 0.0;
      do {
        shift = rng.uniform(-0.5, 0.5);
      } while (std::abs(std::exp(shift) - (1.0 + clip)) < 1e-3 ||
               std::abs(std::exp(shift) - (1.0 - clip)) < 1e-3);
      b.log_prob_old[j] = logp[j] - shift;
      if (std::abs(std::exp(shift) - 1.0) > clip) ++clipped_samples;
    }
    const PolicyLoss loss = ppo_policy_loss(b, policy, clip);
    auto f = [&](const Eigen::VectorXd& p) {
      GaussianPolicy probe = policy;
      probe.set_flat(p);
      return ppo_policy_loss(b, probe, clip).loss;
    };
    worst = std::max(worst, relative_error(loss.grad, numeric_gradient(f, policy.flat(), kFdStep)));
  }
  return {"clipped surrogate gradient vs finite differences", worst < kGradTolerance,
          fmt::format("{} instances ({} clipped samples), worst relative error {:.3e} (limit {:.0e})",
                      instances, clipped_samples, worst, kGradTolerance)};
}

CheckResult check_gae(int instances, std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (int k = 0; k < instances; ++k) {
    const auto n = static_cast<std::size_t>(5 + rng.below(16));
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> d(n);
    for (std::size_t t = 0; t < n; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
      d[t] = rng.uniform() < 0.2 ? 1 : 0;
    }
    const double bootstrap = rng.normal();
    const double gamma = rng.uniform(0.8, 1.0);
    const double lam = rng.uniform(0.8, 1.0);
    const GaeResult got = compute_gae(r, v, d, bootstrap, gamma, lam);
    const Eigen::VectorXd want = brute_force_gae(r, v, d, bootstrap, gamma, lam);
    const Eigen::VectorXd values = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
    worst = std::max(worst, (got.advantages - want).cwiseAbs().maxCoeff());
    worst = std::max(worst, (got.returns - (want + values)).cwiseAbs().maxCoeff());
  }
  return {"GAE vs brute-force recursion", worst <= kGaeTolerance,
          fmt::format("{} instances of 5-20 steps, worst abs error {:.3e} (limit {:.0e})", instances,
                      worst, kGaeTolerance)};
}

std::vector<CheckResult> run_gradcheck_suite(std::uint64_t seed) {
  return {check_mlp_gradients(50, seed), check_log_prob_gradients(50, seed + 1),
          check_surrogate_gradients(50, seed + 2), check_gae(100, seed + 3)};
}

}  // namespace safe_arm::checks
