#pragma once

// Pipeline stages behind the command-line tool. Each stage reads and writes
// only persisted artifacts, so stages can be resumed or rerun separately.
//
// Run directory (<output_dir>/<case>_<vut>_seed<seed>/):
//   config.json               config snapshot
//   checkpoints/step_NNNNNNNNN.bin
//   train.csv                 step_index,eval_mean_episode_reward,crash_rate
//   spcp.txt                  file name of the selected checkpoint
//   run.json                  completion marker with run metadata
//
// Every CSV starts with "# config_hash=<hex> seed=<seed or all>" followed by
// a header row.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ayss/config.hpp"
#include "ayss/eval.hpp"

namespace ayss::cli {

namespace fs = std::filesystem;

std::string run_dir_name(sim::Case c, const std::string& vut_id, std::uint64_t seed);
fs::path run_dir(const config::ExperimentConfig& cfg, const std::string& vut_id,
                 std::uint64_t seed);

struct TrainOutput {
  fs::path dir;
  std::vector<rl::PolicyCheckpoint> checkpoints;  // in step order
  std::size_t selected = 0;
};

/// Trains one (vut, seed) pair into its run directory, replacing earlier
/// contents. out overrides the directory.
TrainOutput cmd_train(const config::ExperimentConfig& cfg, const std::string& vut_id,
                      std::uint64_t seed, const std::optional<fs::path>& out = std::nullopt);

struct ManifestEntry {
  std::string vut_id;
  std::uint64_t seed = 0;
  fs::path checkpoint;
  std::uint64_t step_index = 0;
  double eval_mean_episode_reward = 0.0;
  double eval_crash_rate = 0.0;
};

struct Manifest {
  sim::Case scenario_case = sim::Case::one_lane;
  std::uint64_t config_hash = 0;
  std::vector<ManifestEntry> entries;
};

/// Picks the SPCP of every run directory. Throws RuntimeError listing every
/// missing or incomplete run.
Manifest cmd_select(const config::ExperimentConfig& cfg, const std::vector<fs::path>& run_dirs);
/// All VUT x seed runs of the config under its output directory.
Manifest cmd_select(const config::ExperimentConfig& cfg);

void save_manifest(const Manifest& m, const fs::path& path);
Manifest load_manifest(const fs::path& path);

struct EvaluateOptions {
  std::optional<long> n_samples;
  std::optional<int> n_episodes;
};

struct EvaluationReport {
  fs::path dir;
  std::vector<eval::AggressivenessRecord> records;
  eval::CurveReport curve;
  std::vector<eval::SafetyOutcomeRow> outcomes;
  std::vector<eval::Verdict> verdicts;  // every VUT pair in config order; empty for one VUT
  std::string summary;
};

/// Writes records.csv, curve.csv, outcomes.csv and verdict.txt into out.
EvaluationReport cmd_evaluate(const Manifest& manifest, const config::ExperimentConfig& cfg,
                              const fs::path& out, const EvaluateOptions& options = {});

/// Human-readable summary rebuilt from a report directory.
std::string cmd_report(const fs::path& report_dir);

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

}  // namespace ayss::cli
