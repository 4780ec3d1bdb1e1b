// Command-line experiment runner.
//
//   safe_arm train --config PATH [--algo ppo|cppo] [--ar ar1|ar2] [--seed N]...
//                  [--out DIR] [--desk-scale]
//   safe_arm summarize --runs DIR [--window N] [--out DIR]
//   safe_arm gradcheck
//   safe_arm simcheck

#include "safe_arm/checks.hpp"
#include "safe_arm/errors.hpp"
#include "safe_arm/harness.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace safe_arm;

int report_checks(const std::vector<checks::CheckResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    fmt::print("[{}] {}: {}\n", r.passed ? "PASS" : "FAIL", r.name, r.detail);
    ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}

int run_train(const std::string& config_path, const std::string& algo, const std::string& ar,
              const std::vector<std::uint64_t>& seeds, const std::string& out, bool desk_scale) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (!algo.empty()) config.trainer.algorithm = algorithm_from_string(algo);
  if (!ar.empty()) config.env.action_repr = action_repr_from_string(ar);
  if (!seeds.empty()) config.seeds = seeds;
  if (!out.empty()) config.output_dir = out;
  if (desk_scale) apply_desk_scale(config);
  config.validate();

  const auto reports = run_experiment(config);
  for (const auto& r : reports) {
    const auto& s = r.summary;
    fmt::print("{}: final-window cost {:.3f} ± {:.3f}, reward {:.3f}, epochs to threshold {}\n",
               r.run_name(), s.mean_final_cost, s.std_final_cost, s.mean_final_reward,
               s.epochs_to_reward_threshold ? std::to_string(*s.epochs_to_reward_threshold) : "-");
  }
  return 0;
}

int run_summarize(const std::string& runs, int window, const std::string& out) {
  const auto reports = load_reports(runs);
  if (reports.empty()) throw ConfigError(fmt::format("no report.json files under '{}'", runs));
  const SummaryTable table = summarize_runs(reports, window);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(runs) : std::filesystem::path(out);
  std::filesystem::create_directories(dir);
  {
    std::ofstream txt(dir / "summary.txt", std::ios::binary);
    txt << table.render_text();
    std::ofstream csv(dir / "summary.csv", std::ios::binary);
    csv << table.render_csv();
    if (!txt || !csv) throw ConfigError(fmt::format("cannot write summary into '{}'", dir.string()));
  }
  emit_curves(reports, dir);
  fmt::print("{}", table.render_text());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe reinforcement learning for a simulated 7-DoF arm"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train PPO or Lagrangian PPO runs");
  std::string config_path, algo, ar, out;
  std::vector<std::uint64_t> seeds;
  bool desk_scale = false;
  train->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  train->add_option("--algo", algo, "ppo or cppo")->check(CLI::IsMember({"ppo", "cppo"}));
  train->add_option("--ar", ar, "ar1 (Cartesian via IK) or ar2 (joint deltas)")
      ->check(CLI::IsMember({"ar1", "ar2"}));
  train->add_option("--seed", seeds, "Seed(s); overrides the config");
  train->add_option("--out", out, "Output directory; overrides the config");
  train->add_flag("--desk-scale", desk_scale, "Cap at 30 epochs and 500 steps per episode");

  auto* summarize = app.add_subcommand("summarize", "Aggregate run reports into the cost table and curves");
  std::string runs_dir, summary_out;
  int window = 10;
  summarize->add_option("--runs", runs_dir, "Directory containing run outputs")->required();
  summarize->add_option("--window", window, "Final epochs averaged per run")->check(CLI::PositiveNumber);
  summarize->add_option("--out", summary_out, "Where to write summary files (default: --runs)");

  auto* gradcheck = app.add_subcommand("gradcheck", "Gradient and GAE verification suite");
  auto* simcheck = app.add_subcommand("simcheck", "Kinematics and collision verification suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*train) return run_train(config_path, algo, ar, seeds, out, desk_scale);
    if (*summarize) return run_summarize(runs_dir, window, summary_out);
    if (*gradcheck) return report_checks(checks::run_gradcheck_suite());
    if (*simcheck) return report_checks(checks::run_simcheck_suite());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
