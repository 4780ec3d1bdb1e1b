#include "safe_arm/neural.hpp"

#include "safe_arm/errors.hpp"
#include "safe_arm/json_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace safe_arm {

namespace {

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

Eigen::MatrixXd orthogonal(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng) {
  const bool tall = rows >= cols;
  const Eigen::Index r = tall ? rows : cols;
  const Eigen::Index c = tall ? cols : rows;
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) a(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(r, c);
  // Sign fix makes the draw uniform over orthogonal matrices.
  const Eigen::MatrixXd rr = qr.matrixQR();
  for (Eigen::Index j = 0; j < c; ++j)
    if (rr(j, j) < 0.0) q.col(j) = -q.col(j);
  if (!tall) q.transposeInPlace();
  return gain * q;
}

}  // namespace

Eigen::Index MlpParams::param_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::VectorXd MlpParams::flat() const {
  Eigen::VectorXd out(param_count());
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    out.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    out.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return out;
}

void MlpParams::set_flat(const Eigen::VectorXd& values) {
  require(values.size() == param_count(), "flat parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = values.segment(k, l.weight.size());
    k += l.weight.size();
    l.bias = values.segment(k, l.bias.size());
    k += l.bias.size();
  }
}

Eigen::VectorXd MlpGrads::flat() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  Eigen::VectorXd out(n);
  Eigen::Index k = 0;
  for (const auto& l : layers) {
    out.segment(k, l.weight.size()) = l.weight.reshaped();
    k += l.weight.size();
    out.segment(k, l.bias.size()) = l.bias;
    k += l.bias.size();
  }
  return out;
}

MlpParams make_mlp(std::span<const int> sizes, Rng& rng, double output_gain) {
  require(sizes.size() >= 2, "an MLP needs at least input and output sizes");
  MlpParams params;
  const double hidden_gain = std::sqrt(2.0);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    require(sizes[l] > 0 && sizes[l + 1] > 0, "layer sizes must be positive");
    const bool last = l + 2 == sizes.size();
    DenseLayer layer;
    layer.weight = orthogonal(sizes[l + 1], sizes[l], last ? output_gain : hidden_gain, rng);
    layer.bias = Eigen::VectorXd::Zero(sizes[l + 1]);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

std::pair<Eigen::MatrixXd, MlpCache> mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x) {
  require(!params.layers.empty(), "MLP has no layers");
  require(x.rows() == params.in_dim(),
          fmt::format("MLP input has {} rows, expected {}", x.rows(), params.in_dim()));
  MlpCache cache;
  cache.inputs.reserve(params.layers.size());
  cache.pre.reserve(params.layers.size());
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Eigen::MatrixXd z = layer.weight * h;
    z.colwise() += layer.bias;
    cache.inputs.push_back(std::move(h));
    if (l + 1 < params.layers.size()) {
      h = z.array().tanh().matrix();
    } else {
      h = z;
    }
    cache.pre.push_back(std::move(z));
  }
  return {std::move(h), std::move(cache)};
}

Eigen::MatrixXd mlp_predict(const MlpParams& params, const Eigen::MatrixXd& x) {
  require(x.rows() == params.in_dim(),
          fmt::format("MLP input has {} rows, expected {}", x.rows(), params.in_dim()));
  Eigen::MatrixXd h = x;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& layer = params.layers[l];
    Eigen::MatrixXd z = layer.weight * h;
    z.colwise() += layer.bias;
    h = (l + 1 < params.layers.size()) ? Eigen::MatrixXd(z.array().tanh().matrix()) : z;
  }
  return h;
}

MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Eigen::MatrixXd& grad_y) {
  require(cache.inputs.size() == params.layers.size(), "cache does not match the network");
  require(grad_y.rows() == params.out_dim() && grad_y.cols() == cache.inputs.front().cols(),
          "grad_y shape does not match the forward output");
  MlpGrads grads;
  grads.layers.resize(params.layers.size());
  Eigen::MatrixXd delta = grad_y;  // dL/dz of the current layer
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    if (l + 1 < params.layers.size()) {
      // d tanh(z) / dz = 1 - tanh(z)^2; cache.inputs[l + 1] holds tanh(z_l).
      delta = (delta.array() * (1.0 - cache.inputs[l + 1].array().square())).matrix();
    }
    grads.layers[l].weight = delta * cache.inputs[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    delta = params.layers[l].weight.transpose() * delta;
  }
  grads.input = std::move(delta);
  return grads;
}

Eigen::VectorXd GaussianPolicy::flat() const {
  Eigen::VectorXd out(param_count());
  out << mean_net.flat(), log_std;
  return out;
}

void GaussianPolicy::set_flat(const Eigen::VectorXd& values) {
  require(values.size() == param_count(), "flat policy vector has the wrong length");
  const Eigen::Index n = mean_net.param_count();
  mean_net.set_flat(values.head(n));
  log_std = values.tail(log_std.size());
  clamp_log_std();
}

void GaussianPolicy::clamp_log_std() { log_std = log_std.cwiseMax(kMinLogStd).cwiseMin(kMaxLogStd); }

GaussianPolicy make_policy(std::span<const int> sizes, Rng& rng, double init_log_std) {
  GaussianPolicy policy;
  policy.mean_net = make_mlp(sizes, rng, 0.01);
  policy.log_std = Eigen::VectorXd::Constant(sizes.back(), init_log_std);
  policy.clamp_log_std();
  return policy;
}

double gaussian_log_prob(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                         const Eigen::VectorXd& action) {
  require(action.size() == policy.act_dim(), "action dimension does not match the policy");
  const Eigen::VectorXd mean = mlp_predict(policy.mean_net, obs);
  const Eigen::ArrayXd z = (action - mean).array() * (-policy.log_std).array().exp();
  return (-0.5 * z.square() - policy.log_std.array() - kHalfLog2Pi).sum();
}

PolicySample gaussian_sample(const GaussianPolicy& policy, const Eigen::VectorXd& obs, Rng& rng) {
  const Eigen::VectorXd mean = mlp_predict(policy.mean_net, obs);
  Eigen::VectorXd noise(mean.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = rng.normal();
  PolicySample s;
  s.action = mean + (policy.log_std.array().exp() * noise.array()).matrix();
  s.log_prob = gaussian_log_prob(policy, obs, s.action);
  return s;
}

PolicyBatchEval gaussian_log_prob_batch(const GaussianPolicy& policy, const Eigen::MatrixXd& obs,
                                        const Eigen::MatrixXd& actions) {
  require(actions.rows() == policy.act_dim() && actions.cols() == obs.cols(),
          "action batch does not match the observation batch");
  auto [mean, cache] = mlp_forward(policy.mean_net, obs);
  const Eigen::ArrayXd inv_std = (-policy.log_std).array().exp();
  const Eigen::ArrayXXd z = (actions - mean).array().colwise() * inv_std;
  const double norm = policy.log_std.sum() + kHalfLog2Pi * static_cast<double>(policy.act_dim());
  PolicyBatchEval out;
  out.log_prob = (-0.5 * z.square().colwise().sum()).transpose().matrix();
  out.log_prob.array() -= norm;
  out.mean = std::move(mean);
  out.cache = std::move(cache);
  return out;
}

Eigen::VectorXd gaussian_log_prob_backward(const GaussianPolicy& policy, const PolicyBatchEval& eval,
                                           const Eigen::MatrixXd& actions,
                                           const Eigen::VectorXd& weights) {
  require(weights.size() == actions.cols(), "one weight per sample required");
  const Eigen::ArrayXd inv_var = (-2.0 * policy.log_std).array().exp();
  const Eigen::ArrayXXd diff = (actions - eval.mean).array();
  // d log p / d mean = (a - mean) / sigma^2
  Eigen::MatrixXd grad_mean = (diff.colwise() * inv_var).matrix();
  grad_mean.array().rowwise() *= weights.transpose().array();
  const MlpGrads g = mlp_backward(policy.mean_net, eval.cache, grad_mean);
  // d log p / d log_std = (a - mean)^2 / sigma^2 - 1
  const Eigen::ArrayXXd dlogstd = diff.square().colwise() * inv_var - 1.0;
  const Eigen::VectorXd grad_log_std = (dlogstd.matrix() * weights);
  Eigen::VectorXd out(policy.param_count());
  out << g.flat(), grad_log_std;
  return out;
}

void adam_update(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
                 double lr) {
  require(params.size() == grads.size(), "parameter and gradient sizes differ");
  if (state.first_moment.size() == 0) state = AdamState(params.size());
  require(state.first_moment.size() == params.size(), "Adam state does not match parameters");
  ++state.step;
  state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
  state.second_moment =
      state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseProduct(grads);
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  params.array() -= lr * (state.first_moment.array() / c1) /
                    ((state.second_moment.array() / c2).sqrt() + state.epsilon);
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
  json arr = json::array();
  for (const auto& t : tensors) {
    std::vector<double> data(t.value.data(), t.value.data() + t.value.size());
    arr.push_back({{"name", t.name}, {"shape", {t.value.rows(), t.value.cols()}}, {"data", data}});
  }
  write_json_file(path, {{"schema", 1}, {"layout", "column-major"}, {"tensors", arr}});
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  if (j.value("schema", 0) != 1) throw ConfigError("unsupported checkpoint schema");
  std::vector<NamedTensor> out;
  try {
    for (const auto& t : j.at("tensors")) {
      const auto rows = t.at("shape").at(0).get<Eigen::Index>();
      const auto cols = t.at("shape").at(1).get<Eigen::Index>();
      const auto data = t.at("data").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
        throw ConfigError(fmt::format("tensor '{}' data does not match its shape",
                                      t.at("name").get<std::string>()));
      }
      out.push_back({t.at("name").get<std::string>(),
                     Eigen::Map<const Eigen::MatrixXd>(data.data(), rows, cols)});
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed checkpoint: {}", e.what()));
  }
  return out;
}

std::vector<NamedTensor> mlp_tensors(const std::string& prefix, const MlpParams& params) {
  std::vector<NamedTensor> out;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    out.push_back({fmt::format("{}/{}/weight", prefix, l), params.layers[l].weight});
    out.push_back({fmt::format("{}/{}/bias", prefix, l), params.layers[l].bias});
  }
  return out;
}

void assign_mlp_tensors(const std::string& prefix, const std::vector<NamedTensor>& tensors,
                        MlpParams& params) {
  auto find = [&](const std::string& name) -> const Eigen::MatrixXd& {
    for (const auto& t : tensors)
      if (t.name == name) return t.value;
    throw ConfigError(fmt::format("checkpoint is missing tensor '{}'", name));
  };
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& w = find(fmt::format("{}/{}/weight", prefix, l));
    const auto& b = find(fmt::format("{}/{}/bias", prefix, l));
    if (w.rows() != params.layers[l].weight.rows() || w.cols() != params.layers[l].weight.cols() ||
        b.size() != params.layers[l].bias.size()) {
      throw ConfigError(fmt::format("tensor shape mismatch in layer {} of '{}'", l, prefix));
    }
    params.layers[l].weight = w;
    params.layers[l].bias = b.reshaped();
  }
}

}  // namespace safe_arm
