#pragma once

#include "safe_arm/env.hpp"
#include "safe_arm/json_io.hpp"
#include "safe_arm/rl.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace safe_arm {

inline constexpr int kReportSchema = 1;
inline constexpr const char* kMetricsHeader =
    "epoch,mean_ep_reward,mean_ep_cost,mean_ep_len,lambda,kl,policy_loss,value_loss,cost_value_loss";

struct ExperimentConfig {
  EnvConfig env;
  TrainerConfig trainer;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::filesystem::path output_dir = "runs";
  bool desk_scale = false;
  // Epochs averaged for the final-cost summaries; 0 picks 10 at desk scale
  // and 25 otherwise.
  int final_window = 0;
  // Stop once the success rate stays >= plateau_success for this many
  // consecutive epochs; 0 disables.
  int plateau_epochs = 0;
  double plateau_success = 0.95;

  int effective_final_window() const;
  void validate() const;
};

// Caps training at 30 epochs and 500 steps per episode.
void apply_desk_scale(ExperimentConfig& config);

json experiment_config_to_json(const ExperimentConfig& config);
// Relative arm-model paths resolve against `base_dir`.
ExperimentConfig experiment_config_from_json(const json& j, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunSummary {
  double mean_final_cost = 0.0;
  double std_final_cost = 0.0;
  double mean_final_reward = 0.0;
  std::optional<int> epochs_to_reward_threshold;
};

struct RunReport {
  Algorithm algorithm = Algorithm::kPpo;
  ActionRepr action_repr = ActionRepr::kCartesian;
  std::uint64_t seed = 0;
  int max_epochs = 0;
  int final_window = 10;
  double reward_threshold = 0.0;
  double cost_limit = 0.0;
  double lambda_init = 0.0;
  std::vector<EpochMetrics> series;
  RunSummary summary;

  std::string run_name() const;
};

// -0.1 x the largest possible episode reward magnitude (1 m every step).
double reward_threshold(const EnvConfig& env);

// Mean/std over the last `window` epochs plus the threshold crossing.
RunSummary summarize_series(const std::vector<EpochMetrics>& series, int window, double threshold);

json run_report_to_json(const RunReport& report);
RunReport run_report_from_json(const json& j);

std::string metrics_csv_row(const EpochMetrics& m);

// Called after each epoch's CSV row is flushed; throwing aborts the run.
using EpochCallback = std::function<void(const EpochMetrics&)>;

// Trains one seed and writes <output_dir>/<run_name>/{config.json,
// metrics.csv, report.json, checkpoint.json}.
RunReport run_single(const ExperimentConfig& config, std::uint64_t seed,
                     const EpochCallback& on_epoch = {});

// Every seed of the config; seeds run on up to SAFE_ARM_RL_THREADS workers.
std::vector<RunReport> run_experiment(const ExperimentConfig& config);

std::vector<RunReport> load_reports(const std::filesystem::path& runs_dir);

struct SummaryCell {
  Algorithm algorithm = Algorithm::kPpo;
  ActionRepr action_repr = ActionRepr::kCartesian;
  int runs = 0;
  double cost_mean = 0.0;
  double cost_std = 0.0;
  double reward_mean = 0.0;
  double reward_std = 0.0;
  // Unreached thresholds count as max_epochs + 1.
  double epochs_to_threshold_mean = 0.0;
};

struct SummaryTable {
  int final_window = 0;
  std::vector<SummaryCell> cells;  // sorted by (action_repr, algorithm)

  const SummaryCell* find(Algorithm algo, ActionRepr repr) const;
  std::string render_text() const;
  std::string render_csv() const;
};

// Mean and sample std across runs of each run's final-window mean cost.
// `final_window` <= 0 uses each report's own window.
SummaryTable summarize_runs(const std::vector<RunReport>& reports, int final_window);

// reward_curves.{csv,svg} and cost_curves.{csv,svg}.
void emit_curves(const std::vector<RunReport>& reports, const std::filesystem::path& dir);

std::string render_curve_svg(const std::vector<RunReport>& reports, bool cost_chart);

}  // namespace safe_arm
