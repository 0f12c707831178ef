// Command-line front end: train, select, evaluate, report.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ayss/cli.hpp"
#include "ayss/config.hpp"
#include "ayss/error.hpp"

namespace {

using namespace ayss;

config::ExperimentConfig load_or_default(const std::string& path, const std::string& case_name) {
  if (!path.empty()) return config::load(path);
  return config::default_config(sim::case_from_string(case_name));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adversarial-yet-safe scenario testing of driving policies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string case_name = "one_lane";
  std::string vut_id;
  std::uint64_t seed = 0;
  std::optional<long> steps;
  std::optional<long> n_samples;
  std::optional<int> n_episodes;
  std::string out;
  std::string manifest_path;
  std::vector<std::string> run_dirs;
  std::string report_dir;

  auto* defaults = app.add_subcommand("defaults", "Print the default config for a case");
  defaults->add_option("--case", case_name, "one_lane or two_lane")->check(CLI::IsMember({"one_lane", "two_lane"}));

  auto* train = app.add_subcommand("train", "Train a POV against one VUT and seed");
  train->add_option("--config", config_path, "Experiment config (JSON)")->required();
  train->add_option("--vut", vut_id, "VUT id from the config")->required();
  train->add_option("--seed", seed, "Run seed")->required();
  train->add_option("--steps", steps, "Override train.total_env_steps");
  train->add_option("--out", out, "Run directory (default: <output_dir>/<case>_<vut>_seed<seed>)");

  auto* select = app.add_subcommand("select", "Select the SPCP of every run");
  select->add_option("--config", config_path, "Experiment config (JSON)")->required();
  select->add_option("--steps", steps, "train.total_env_steps the runs were trained with");
  select->add_option("runs", run_dirs, "Run directories (default: every VUT x seed of the config)");
  select->add_option("--out", out, "Manifest path (default: <output_dir>/manifest.json)");

  auto* evaluate = app.add_subcommand("evaluate", "Generate AYSS and compare the VUTs");
  evaluate->add_option("--config", config_path, "Experiment config (JSON)")->required();
  evaluate->add_option("--manifest", manifest_path, "Manifest from select (default: <output_dir>/manifest.json)");
  evaluate->add_option("--steps", steps, "train.total_env_steps the runs were trained with");
  evaluate->add_option("--n-samples", n_samples, "Monte-Carlo observations per SPCP");
  evaluate->add_option("--n-episodes", n_episodes, "Outcome episodes per SPCP");
  evaluate->add_option("--out", out, "Report directory (default: <output_dir>/report)");

  auto* report = app.add_subcommand("report", "Print the summary of a report directory");
  report->add_option("--out", report_dir, "Report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitValidation;
  }

  try {
    if (defaults->parsed()) {
      std::cout << config::to_json(config::default_config(sim::case_from_string(case_name))).dump(2)
                << '\n';
      return cli::kExitOk;
    }
    if (report->parsed()) {
      std::cout << cli::cmd_report(report_dir);
      return cli::kExitOk;
    }

    config::ExperimentConfig cfg = load_or_default(config_path, case_name);
    if (steps) {
      cfg.train.total_env_steps = *steps;
      cfg.validate();
    }

    if (train->parsed()) {
      const auto result = cli::cmd_train(cfg, vut_id, seed,
                                         out.empty() ? std::nullopt : std::optional<cli::fs::path>(out));
      const auto& best = result.checkpoints[result.selected];
      std::cout << "run " << result.dir.string() << ": " << result.checkpoints.size()
                << " checkpoints, SPCP step " << best.step_index << " (mean reward "
                << best.eval_mean_episode_reward << ", crash " << best.eval_crash_rate << "%)\n";
    } else if (select->parsed()) {
      std::vector<cli::fs::path> dirs(run_dirs.begin(), run_dirs.end());
      const cli::Manifest m = dirs.empty() ? cli::cmd_select(cfg) : cli::cmd_select(cfg, dirs);
      const cli::fs::path path = out.empty() ? cli::fs::path(cfg.output_dir) / "manifest.json" : cli::fs::path(out);
      cli::save_manifest(m, path);
      for (const auto& e : m.entries) {
        std::cout << e.vut_id << " seed " << e.seed << " -> " << e.checkpoint.string() << " (mean reward "
                  << e.eval_mean_episode_reward << ")\n";
      }
      std::cout << "manifest " << path.string() << '\n';
    } else if (evaluate->parsed()) {
      const cli::fs::path mpath =
          manifest_path.empty() ? cli::fs::path(cfg.output_dir) / "manifest.json" : cli::fs::path(manifest_path);
      const cli::fs::path rdir = out.empty() ? cli::fs::path(cfg.output_dir) / "report" : cli::fs::path(out);
      const auto result = cli::cmd_evaluate(cli::load_manifest(mpath), cfg, rdir, {n_samples, n_episodes});
      std::cout << result.summary;
    }
    return cli::kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return cli::kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitRuntime;
  }
}
