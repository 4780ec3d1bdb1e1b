#pragma once

#include "safe_arm/rng.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace safe_arm {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

// Fully connected network: tanh on hidden layers, identity on the output.
// Batched calls take one sample per column.
struct MlpParams {
  std::vector<DenseLayer> layers;

  Eigen::Index in_dim() const { return layers.front().weight.cols(); }
  Eigen::Index out_dim() const { return layers.back().weight.rows(); }
  Eigen::Index param_count() const;

  // Layer-major: weight (column-major) then bias, for each layer.
  Eigen::VectorXd flat() const;
  void set_flat(const Eigen::VectorXd& values);
};

struct MlpCache {
  std::vector<Eigen::MatrixXd> inputs;  // inputs[l] feeds layer l
  std::vector<Eigen::MatrixXd> pre;     // pre-activation of layer l
};

struct MlpGrads {
  std::vector<DenseLayer> layers;
  Eigen::MatrixXd input;

  Eigen::VectorXd flat() const;
};

// Orthogonal init scaled by sqrt(2) on hidden layers and `output_gain` on
// the last layer; zero biases. `sizes` = {in, hidden..., out}.
MlpParams make_mlp(std::span<const int> sizes, Rng& rng, double output_gain);

std::pair<Eigen::MatrixXd, MlpCache> mlp_forward(const MlpParams& params, const Eigen::MatrixXd& x);
Eigen::MatrixXd mlp_predict(const MlpParams& params, const Eigen::MatrixXd& x);

// Reverse-mode gradients of sum(y .* grad_y) with respect to every weight,
// bias, and the input, summed over the batch.
MlpGrads mlp_backward(const MlpParams& params, const MlpCache& cache, const Eigen::MatrixXd& grad_y);

// Diagonal Gaussian with state-independent log standard deviation.
struct GaussianPolicy {
  static constexpr double kMinLogStd = -5.0;
  static constexpr double kMaxLogStd = 2.0;

  MlpParams mean_net;
  Eigen::VectorXd log_std;

  Eigen::Index obs_dim() const { return mean_net.in_dim(); }
  Eigen::Index act_dim() const { return mean_net.out_dim(); }
  Eigen::Index param_count() const { return mean_net.param_count() + log_std.size(); }
  Eigen::VectorXd flat() const;
  // Writes parameters and re-applies the log_std clamp.
  void set_flat(const Eigen::VectorXd& values);
  void clamp_log_std();
};

GaussianPolicy make_policy(std::span<const int> sizes, Rng& rng, double init_log_std);

double gaussian_log_prob(const GaussianPolicy& policy, const Eigen::VectorXd& obs,
                         const Eigen::VectorXd& action);

struct PolicySample {
  Eigen::VectorXd action;
  double log_prob = 0.0;
};
PolicySample gaussian_sample(const GaussianPolicy& policy, const Eigen::VectorXd& obs, Rng& rng);

struct PolicyBatchEval {
  Eigen::MatrixXd mean;
  Eigen::VectorXd log_prob;
  MlpCache cache;
};
PolicyBatchEval gaussian_log_prob_batch(const GaussianPolicy& policy, const Eigen::MatrixXd& obs,
                                        const Eigen::MatrixXd& actions);

// Gradient of sum_j weights[j] * log_prob[j] in GaussianPolicy::flat() layout.
Eigen::VectorXd gaussian_log_prob_backward(const GaussianPolicy& policy, const PolicyBatchEval& eval,
                                           const Eigen::MatrixXd& actions,
                                           const Eigen::VectorXd& weights);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  Eigen::VectorXd first_moment;
  Eigen::VectorXd second_moment;

  AdamState() = default;
  explicit AdamState(Eigen::Index n)
      : first_moment(Eigen::VectorXd::Zero(n)), second_moment(Eigen::VectorXd::Zero(n)) {}
};

// Bias-corrected Adam step that descends along `grads`.
void adam_update(AdamState& state, Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grads,
                 double lr);

// Checkpoints: JSON {"schema":1,"tensors":[{"name","shape":[rows,cols],"data":[...]}]}.
// Doubles are written in shortest round-trip form, so reload is bit-exact.
struct NamedTensor {
  std::string name;
  Eigen::MatrixXd value;
};

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

std::vector<NamedTensor> mlp_tensors(const std::string& prefix, const MlpParams& params);
void assign_mlp_tensors(const std::string& prefix, const std::vector<NamedTensor>& tensors,
                        MlpParams& params);

}  // namespace safe_arm
