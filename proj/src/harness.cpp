#include "safe_arm/harness.hpp"

#include "safe_arm/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

namespace safe_arm {

namespace fs = std::filesystem;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw ConfigError(fmt::format("'{}' must be a JSON object", where));
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where));
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("field '{}': {}", key, e.what()));
  }
}

json env_config_to_json(const EnvConfig& env) {
  return {{"arm_model", arm_model_to_json(env.arm)},
          {"action_repr", to_string(env.action_repr)},
          {"max_episode_steps", env.max_episode_steps},
          {"action_scale_cart", env.action_scale_cart},
          {"action_scale_joint", env.action_scale_joint},
          {"success_radius", env.success_radius},
          {"target_region", aabb_to_json(env.target_region)},
          {"obstacle_region", aabb_to_json(env.obstacle_region)},
          {"obstacle_size", vec3_to_json(env.obstacle_size)},
          {"table", aabb_to_json(env.table)},
          {"seed", env.seed}};
}

EnvConfig env_config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown_keys(j,
                      {"arm_model", "action_repr", "max_episode_steps", "action_scale_cart",
                       "action_scale_joint", "success_radius", "target_region", "obstacle_region",
                       "obstacle_size", "table", "seed"},
                      "env");
  EnvConfig env;
  env.arm = default_panda_model();
  if (j.contains("arm_model")) {
    const json& arm = j["arm_model"];
    if (arm.is_string()) {
      fs::path p = arm.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      env.arm = load_arm_model(p);
    } else {
      env.arm = arm_model_from_json(arm);
    }
  }
  if (j.contains("action_repr")) env.action_repr = action_repr_from_string(j["action_repr"].get<std::string>());
  read_field(j, "max_episode_steps", env.max_episode_steps);
  read_field(j, "action_scale_cart", env.action_scale_cart);
  read_field(j, "action_scale_joint", env.action_scale_joint);
  read_field(j, "success_radius", env.success_radius);
  if (j.contains("target_region")) env.target_region = aabb_from_json(j["target_region"], "target_region");
  if (j.contains("obstacle_region")) env.obstacle_region = aabb_from_json(j["obstacle_region"], "obstacle_region");
  if (j.contains("obstacle_size")) env.obstacle_size = vec3_from_json(j["obstacle_size"], "obstacle_size");
  if (j.contains("table")) env.table = aabb_from_json(j["table"], "table");
  read_field(j, "seed", env.seed);
  return env;
}

json trainer_config_to_json(const TrainerConfig& t) {
  return {{"algorithm", to_string(t.algorithm)},
          {"gamma", t.gamma},
          {"gae_lambda", t.gae_lambda},
          {"clip_eps", t.clip_eps},
          {"policy_lr", t.policy_lr},
          {"value_lr", t.value_lr},
          {"minibatch_size", t.minibatch_size},
          {"update_passes", t.update_passes},
          {"target_kl", t.target_kl},
          {"steps_per_epoch", t.steps_per_epoch},
          {"max_epochs", t.max_epochs},
          {"hidden_sizes", t.hidden_sizes},
          {"init_log_std", t.init_log_std},
          {"cost_limit", t.cost_limit},
          {"dual_lr", t.dual_lr},
          {"lambda_init", t.lambda_init},
          {"pin_lambda", t.pin_lambda}};
}

TrainerConfig trainer_config_from_json(const json& j) {
  reject_unknown_keys(j,
                      {"algorithm", "gamma", "gae_lambda", "clip_eps", "policy_lr", "value_lr",
                       "minibatch_size", "update_passes", "target_kl", "steps_per_epoch",
                       "max_epochs", "hidden_sizes", "init_log_std", "cost_limit", "dual_lr",
                       "lambda_init", "pin_lambda"},
                      "trainer");
  TrainerConfig t;
  if (j.contains("algorithm")) t.algorithm = algorithm_from_string(j["algorithm"].get<std::string>());
  read_field(j, "gamma", t.gamma);
  read_field(j, "gae_lambda", t.gae_lambda);
  read_field(j, "clip_eps", t.clip_eps);
  read_field(j, "policy_lr", t.policy_lr);
  read_field(j, "value_lr", t.value_lr);
  read_field(j, "minibatch_size", t.minibatch_size);
  read_field(j, "update_passes", t.update_passes);
  read_field(j, "target_kl", t.target_kl);
  read_field(j, "steps_per_epoch", t.steps_per_epoch);
  read_field(j, "max_epochs", t.max_epochs);
  read_field(j, "hidden_sizes", t.hidden_sizes);
  read_field(j, "init_log_std", t.init_log_std);
  read_field(j, "cost_limit", t.cost_limit);
  read_field(j, "dual_lr", t.dual_lr);
  read_field(j, "lambda_init", t.lambda_init);
  read_field(j, "pin_lambda", t.pin_lambda);
  return t;
}

json metrics_to_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},
          {"mean_ep_reward", m.mean_ep_reward},
          {"mean_ep_cost", m.mean_ep_cost},
          {"mean_ep_len", m.mean_ep_len},
          {"lambda", m.lambda},
          {"kl", m.kl},
          {"policy_loss", m.policy_loss},
          {"value_loss", m.value_loss},
          {"cost_value_loss", m.cost_value_loss},
          {"episodes", m.episodes},
          {"success_rate", m.success_rate},
          {"policy_passes", m.policy_passes}};
}

EpochMetrics metrics_from_json(const json& j) {
  EpochMetrics m;
  m.epoch = j.at("epoch").get<int>();
  m.mean_ep_reward = j.at("mean_ep_reward").get<double>();
  m.mean_ep_cost = j.at("mean_ep_cost").get<double>();
  m.mean_ep_len = j.at("mean_ep_len").get<double>();
  m.lambda = j.at("lambda").get<double>();
  m.kl = j.at("kl").get<double>();
  m.policy_loss = j.at("policy_loss").get<double>();
  m.value_loss = j.at("value_loss").get<double>();
  m.cost_value_loss = j.at("cost_value_loss").get<double>();
  m.episodes = j.value("episodes", 0);
  m.success_rate = j.value("success_rate", 0.0);
  m.policy_passes = j.value("policy_passes", 0);
  return m;
}

double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

void ensure_writable(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path probe = dir / ".write_probe";
  std::ofstream out(probe);
  if (ec || !out) throw ConfigError(fmt::format("output directory '{}' is not writable", dir.string()));
  out.close();
  fs::remove(probe, ec);
}

unsigned worker_count(std::size_t jobs) {
  unsigned cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("SAFE_ARM_RL_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) cap = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(cap, std::max<std::size_t>(jobs, 1)));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

}  // namespace

int ExperimentConfig::effective_final_window() const {
  if (final_window > 0) return final_window;
  return desk_scale ? 10 : 25;
}

void ExperimentConfig::validate() const {
  env.validate();
  trainer.validate();
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (final_window < 0) throw ConfigError("final_window must be >= 0");
  if (plateau_epochs < 0) throw ConfigError("plateau_epochs must be >= 0");
}

void apply_desk_scale(ExperimentConfig& config) {
  config.desk_scale = true;
  config.trainer.max_epochs = std::min(config.trainer.max_epochs, 30);
  config.env.max_episode_steps = std::min(config.env.max_episode_steps, 500);
}

json experiment_config_to_json(const ExperimentConfig& config) {
  json seeds = json::array();
  for (auto s : config.seeds) seeds.push_back(s);
  return {{"env", env_config_to_json(config.env)},
          {"trainer", trainer_config_to_json(config.trainer)},
          {"seeds", seeds},
          {"output_dir", config.output_dir.string()},
          {"desk_scale", config.desk_scale},
          {"final_window", config.effective_final_window()},
          {"plateau_epochs", config.plateau_epochs},
          {"plateau_success", config.plateau_success}};
}

ExperimentConfig experiment_config_from_json(const json& j, const fs::path& base_dir) {
  reject_unknown_keys(j,
                      {"env", "trainer", "seeds", "output_dir", "desk_scale", "final_window",
                       "plateau_epochs", "plateau_success"},
                      "config");
  ExperimentConfig c;
  c.env = env_config_from_json(j.value("env", json::object()), base_dir);
  c.trainer = trainer_config_from_json(j.value("trainer", json::object()));
  if (j.contains("seeds")) {
    c.seeds.clear();
    try {
      for (const auto& s : j["seeds"]) c.seeds.push_back(s.get<std::uint64_t>());
    } catch (const json::exception& e) {
      throw ConfigError(fmt::format("field 'seeds': {}", e.what()));
    }
  }
  if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
  read_field(j, "desk_scale", c.desk_scale);
  read_field(j, "final_window", c.final_window);
  read_field(j, "plateau_epochs", c.plateau_epochs);
  read_field(j, "plateau_success", c.plateau_success);
  if (c.desk_scale) apply_desk_scale(c);
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  return experiment_config_from_json(read_json_file(path), path.parent_path());
}

std::string RunReport::run_name() const {
  return fmt::format("{}_{}_seed{}", to_string(algorithm), to_string(action_repr), seed);
}

double reward_threshold(const EnvConfig& env) {
  return -0.1 * static_cast<double>(env.max_episode_steps);
}

RunSummary summarize_series(const std::vector<EpochMetrics>& series, int window, double threshold) {
  RunSummary s;
  if (series.empty()) return s;
  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(std::max(window, 1)), series.size());
  std::vector<double> costs, rewards;
  for (std::size_t i = series.size() - w; i < series.size(); ++i) {
    costs.push_back(series[i].mean_ep_cost);
    rewards.push_back(series[i].mean_ep_reward);
  }
  s.mean_final_cost = mean_of(costs);
  s.std_final_cost = sample_std(costs);
  s.mean_final_reward = mean_of(rewards);
  for (const auto& m : series) {
    if (m.mean_ep_reward > threshold) {
      s.epochs_to_reward_threshold = m.epoch;
      break;
    }
  }
  return s;
}

json run_report_to_json(const RunReport& r) {
  json series = json::array();
  for (const auto& m : r.series) series.push_back(metrics_to_json(m));
  json summary = {{"mean_final_cost", r.summary.mean_final_cost},
                  {"std_final_cost", r.summary.std_final_cost},
                  {"mean_final_reward", r.summary.mean_final_reward},
                  {"epochs_to_reward_threshold",
                   r.summary.epochs_to_reward_threshold ? json(*r.summary.epochs_to_reward_threshold)
                                                        : json(nullptr)}};
  return {{"schema", kReportSchema},
          {"algorithm", to_string(r.algorithm)},
          {"action_repr", to_string(r.action_repr)},
          {"seed", r.seed},
          {"max_epochs", r.max_epochs},
          {"final_window", r.final_window},
          {"reward_threshold", r.reward_threshold},
          {"cost_limit", r.cost_limit},
          {"lambda_init", r.lambda_init},
          {"series", series},
          {"summary", summary}};
}

RunReport run_report_from_json(const json& j) {
  if (j.value("schema", 0) != kReportSchema) {
    throw ConfigError(fmt::format("unsupported report schema (expected {})", kReportSchema));
  }
  RunReport r;
  try {
    r.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    r.action_repr = action_repr_from_string(j.at("action_repr").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.max_epochs = j.at("max_epochs").get<int>();
    r.final_window = j.at("final_window").get<int>();
    r.reward_threshold = j.at("reward_threshold").get<double>();
    r.cost_limit = j.at("cost_limit").get<double>();
    r.lambda_init = j.value("lambda_init", 0.0);
    for (const auto& m : j.at("series")) r.series.push_back(metrics_from_json(m));
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed run report: {}", e.what()));
  }
  r.summary = summarize_series(r.series, r.final_window, r.reward_threshold);
  return r;
}

std::string metrics_csv_row(const EpochMetrics& m) {
  return fmt::format("{},{},{},{},{},{},{},{},{}\n", m.epoch, m.mean_ep_reward, m.mean_ep_cost,
                     m.mean_ep_len, m.lambda, m.kl, m.policy_loss, m.value_loss, m.cost_value_loss);
}

RunReport run_single(const ExperimentConfig& config, std::uint64_t seed, const EpochCallback& on_epoch) {
  config.validate();
  RunReport report;
  report.algorithm = config.trainer.algorithm;
  report.action_repr = config.env.action_repr;
  report.seed = seed;
  report.max_epochs = config.trainer.max_epochs;
  report.final_window = config.effective_final_window();
  report.reward_threshold = reward_threshold(config.env);
  report.cost_limit = config.trainer.cost_limit;
  report.lambda_init = config.trainer.lambda_init;

  const fs::path dir = config.output_dir / report.run_name();
  ensure_writable(dir);

  ExperimentConfig effective = config;
  effective.seeds = {seed};
  effective.env.seed = seed;
  effective.output_dir = config.output_dir;
  write_json_file(dir / "config.json", experiment_config_to_json(effective));

  std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw ConfigError(fmt::format("cannot write '{}'", (dir / "metrics.csv").string()));
  csv << kMetricsHeader << '\n';
  csv.flush();

  ReachEnv env(effective.env);
  Trainer trainer(effective.trainer, env.obs_dim(), env.act_dim(), seed);
  int plateau = 0;
  for (int epoch = 0; epoch < effective.trainer.max_epochs; ++epoch) {
    EpochMetrics m;
    try {
      m = trainer.train_epoch(env);
    } catch (const TrainingDiverged& e) {
      write_text(dir / "diverged.txt", std::string(e.what()) + "\n");
      throw TrainingDiverged(fmt::format("seed {}: {}", seed, e.what()));
    }
    report.series.push_back(m);
    csv << metrics_csv_row(m);
    csv.flush();
    if (on_epoch) on_epoch(m);
    if (config.plateau_epochs > 0) {
      plateau = m.success_rate >= config.plateau_success ? plateau + 1 : 0;
      if (plateau >= config.plateau_epochs) break;
    }
  }
  report.summary = summarize_series(report.series, report.final_window, report.reward_threshold);
  save_checkpoint(dir / "checkpoint.json", trainer.checkpoint());
  write_json_file(dir / "report.json", run_report_to_json(report));
  return report;
}

std::vector<RunReport> run_experiment(const ExperimentConfig& config) {
  config.validate();
  ensure_writable(config.output_dir);
  std::vector<RunReport> reports(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      try {
        reports[i] = run_single(config, config.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = worker_count(config.seeds.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const TrainingDiverged&) {
      throw;
    } catch (const std::exception& e) {
      throw std::runtime_error(fmt::format("seed {}: {}", config.seeds[i], e.what()));
    }
  }
  return reports;
}

std::vector<RunReport> load_reports(const fs::path& runs_dir) {
  if (!fs::is_directory(runs_dir)) {
    throw ConfigError(fmt::format("'{}' is not a directory", runs_dir.string()));
  }
  std::vector<RunReport> reports;
  for (const auto& entry : fs::recursive_directory_iterator(runs_dir)) {
    if (entry.is_regular_file() && entry.path().filename() == "report.json") {
      reports.push_back(run_report_from_json(read_json_file(entry.path())));
    }
  }
  std::sort(reports.begin(), reports.end(), [](const RunReport& a, const RunReport& b) {
    return std::tuple(a.action_repr, a.algorithm, a.seed) <
           std::tuple(b.action_repr, b.algorithm, b.seed);
  });
  return reports;
}

const SummaryCell* SummaryTable::find(Algorithm algo, ActionRepr repr) const {
  for (const auto& c : cells)
    if (c.algorithm == algo && c.action_repr == repr) return &c;
  return nullptr;
}

std::string SummaryTable::render_text() const {
  auto label = [](ActionRepr r) { return r == ActionRepr::kCartesian ? "AR1 (3D)" : "AR2 (7DoF)"; };
  auto cost_cell = [&](Algorithm a, ActionRepr r) {
    const SummaryCell* c = find(a, r);
    return c ? fmt::format("{:.2f} ± {:.2f}", c->cost_mean, c->cost_std) : std::string("-");
  };
  auto reward_cell = [&](Algorithm a, ActionRepr r) {
    const SummaryCell* c = find(a, r);
    return c ? fmt::format("{:.2f} ± {:.2f}", c->reward_mean, c->reward_std) : std::string("-");
  };
  auto epochs_cell = [&](Algorithm a, ActionRepr r) {
    const SummaryCell* c = find(a, r);
    return c ? fmt::format("{:.2f}", c->epochs_to_threshold_mean) : std::string("-");
  };
  std::string out;
  auto section = [&](const std::string& title, auto cell) {
    out += title + "\n";
    out += fmt::format("{:<12}{:<20}{:<20}\n", "", "PPO", "cPPO");
    for (ActionRepr r : {ActionRepr::kCartesian, ActionRepr::kJoint}) {
      if (!find(Algorithm::kPpo, r) && !find(Algorithm::kCppo, r)) continue;
      // fmt pads by code points, so the ± sign aligns like any other column.
      out += fmt::format("{:<12}{:<20}{:<20}\n", label(r), cell(Algorithm::kPpo, r),
                         cell(Algorithm::kCppo, r));
    }
    out += "\n";
  };
  section(fmt::format("Average episode cost over the last {} epochs (mean ± std across seeds)",
                      final_window),
          cost_cell);
  section(fmt::format("Average episode reward over the last {} epochs (mean ± std across seeds)",
                      final_window),
          reward_cell);
  section("Epochs to reward threshold (mean across seeds)", epochs_cell);
  return out;
}

std::string SummaryTable::render_csv() const {
  std::string out =
      "action_repr,algorithm,runs,cost_mean,cost_std,reward_mean,reward_std,epochs_to_threshold_mean\n";
  for (const auto& c : cells) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", to_string(c.action_repr), to_string(c.algorithm),
                       c.runs, c.cost_mean, c.cost_std, c.reward_mean, c.reward_std,
                       c.epochs_to_threshold_mean);
  }
  return out;
}

SummaryTable summarize_runs(const std::vector<RunReport>& reports, int final_window) {
  require(!reports.empty(), "summarize_runs needs at least one report");
  SummaryTable table;
  table.final_window = final_window > 0 ? final_window : reports.front().final_window;
  for (ActionRepr repr : {ActionRepr::kCartesian, ActionRepr::kJoint}) {
    for (Algorithm algo : {Algorithm::kPpo, Algorithm::kCppo}) {
      std::vector<const RunReport*> group;
      for (const auto& r : reports)
        if (r.algorithm == algo && r.action_repr == repr) group.push_back(&r);
      if (group.empty()) continue;
      std::sort(group.begin(), group.end(),
                [](const RunReport* a, const RunReport* b) { return a->seed < b->seed; });
      std::vector<double> costs, rewards, epochs;
      for (const RunReport* r : group) {
        const int w = final_window > 0 ? final_window : r->final_window;
        const RunSummary s = summarize_series(r->series, w, r->reward_threshold);
        costs.push_back(s.mean_final_cost);
        rewards.push_back(s.mean_final_reward);
        epochs.push_back(static_cast<double>(s.epochs_to_reward_threshold.value_or(r->max_epochs + 1)));
      }
      SummaryCell cell;
      cell.algorithm = algo;
      cell.action_repr = repr;
      cell.runs = static_cast<int>(group.size());
      cell.cost_mean = mean_of(costs);
      cell.cost_std = sample_std(costs);
      cell.reward_mean = mean_of(rewards);
      cell.reward_std = sample_std(rewards);
      cell.epochs_to_threshold_mean = mean_of(epochs);
      table.cells.push_back(cell);
    }
  }
  return table;
}

namespace {

std::string curve_csv(const std::vector<RunReport>& reports, bool cost) {
  std::size_t max_len = 0;
  for (const auto& r : reports) max_len = std::max(max_len, r.series.size());
  std::string out = "epoch";
  for (const auto& r : reports) out += "," + r.run_name();
  out += "\n";
  for (std::size_t e = 0; e < max_len; ++e) {
    out += fmt::format("{}", e + 1);
    for (const auto& r : reports) {
      out += ",";
      if (e < r.series.size()) {
        out += fmt::format("{}", cost ? r.series[e].mean_ep_cost : r.series[e].mean_ep_reward);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace

std::string render_curve_svg(const std::vector<RunReport>& reports, bool cost_chart) {
  constexpr double kWidth = 720, kHeight = 400, kLeft = 70, kRight = 170, kTop = 40, kBottom = 50;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::size_t max_len = 1;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& r : reports) {
    max_len = std::max(max_len, r.series.size());
    for (const auto& m : r.series) {
      const double v = cost_chart ? m.mean_ep_cost : m.mean_ep_reward;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double limit = 0.0;
  bool has_limit = false;
  if (cost_chart) {
    for (const auto& r : reports) {
      if (r.algorithm == Algorithm::kCppo) {
        limit = r.cost_limit;
        has_limit = true;
        break;
      }
    }
    if (has_limit) {
      lo = std::min(lo, limit);
      hi = std::max(hi, limit);
    }
  }
  if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
  if (hi - lo < 1e-12) hi = lo + 1.0;
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto sx = [&](double epoch) {
    return kLeft + (max_len > 1 ? (epoch - 1.0) / static_cast<double>(max_len - 1) : 0.5) * plot_w;
  };
  auto sy = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{3}</text>\n"
      "<rect x=\"{4}\" y=\"{5}\" width=\"{6}\" height=\"{7}\" fill=\"none\" stroke=\"#444\"/>\n",
      kWidth, kHeight, kLeft, cost_chart ? "Mean episode cost per epoch" : "Mean episode reward per epoch",
      kLeft, kTop, plot_w, plot_h);
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"end\">{:.1f}</text>\n",
        kLeft - 6, sy(v) + 4, v);
  }
  svg += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\">epoch (1..{})</text>\n",
      kLeft + plot_w / 2, kHeight - 15, max_len);
  if (has_limit) {
    svg += fmt::format(
        "<line class=\"cost-limit\" x1=\"{:.1f}\" y1=\"{:.2f}\" x2=\"{:.1f}\" y2=\"{:.2f}\" "
        "stroke=\"#555\" stroke-dasharray=\"6,4\"/>\n",
        kLeft, sy(limit), kLeft + plot_w, sy(limit));
  }
  int legend = 0;
  for (const auto& r : reports) {
    if (r.series.empty()) continue;
    const bool ppo = r.algorithm == Algorithm::kPpo;
    const char* color = ppo ? (r.action_repr == ActionRepr::kCartesian ? "#d62728" : "#ff9896")
                            : (r.action_repr == ActionRepr::kCartesian ? "#1f77b4" : "#aec7e8");
    std::string points;
    for (const auto& m : r.series) {
      const double v = cost_chart ? m.mean_ep_cost : m.mean_ep_reward;
      points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", sx(m.epoch), sy(v));
    }
    svg += fmt::format(
        "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"><title>{}</title>"
        "</polyline>\n",
        color, points, r.run_name());
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}"
        "</text>\n",
        kWidth - kRight + 10, kTop + 14.0 * legend++, color, r.run_name());
  }
  svg += "</svg>\n";
  return svg;
}

void emit_curves(const std::vector<RunReport>& reports, const fs::path& dir) {
  require(!reports.empty(), "emit_curves needs at least one report");
  ensure_writable(dir);
  write_text(dir / "reward_curves.csv", curve_csv(reports, false));
  write_text(dir / "cost_curves.csv", curve_csv(reports, true));
  write_text(dir / "reward_curves.svg", render_curve_svg(reports, false));
  write_text(dir / "cost_curves.svg", render_curve_svg(reports, true));
}

}  // namespace safe_arm
