#pragma once

// Experiment configuration file.
//
// A single JSON document; every section is optional and falls back to the
// built-in defaults. Unknown keys anywhere are rejected. Schema version 1:
//
// {
//   "schema_version": 1,
//   "case": "one_lane" | "two_lane",
//   "vuts": [ {"id": "pi1"}, {"id": "pi2"},
//             {"id": "mine", "idm": {"v0": 30, "s0": 15, "T": 1.5, "a_max": 3, "b": 5, "delta": 4}} ],
//   "seeds": [0, 1, 2],
//   "sim":    { "dt", "episode_len", "substeps", "accel_bounds": [lo, hi], "speed_cap",
//               "kp_speed", "k_lat", "k_head", "max_heading", "max_steer",
//               "lane_change_duration_nominal", "vehicle_length", "vehicle_width",
//               "one_lane_odd" / "two_lane_odd": { "vut_speed": [lo, hi], "pov_speed": [lo, hi],
//                                                  "gap": [lo, hi], "reject_unavoidable" },
//               "disturbance_amplitude" },
//   "reward": { "alpha_A", "alpha_C", "same_lane": {"peak_h", "zero_h"}, "lane_change": {...} },
//   "dqn":    { "gamma", "learning_rate", "hidden", "batch_size", "buffer_capacity",
//               "target_update_period", "epsilon_start", "epsilon_end", "epsilon_decay_steps",
//               "alpha", "beta0", "beta_anneal_steps", "epsilon_p", "update_per_step",
//               "warmup_steps" },
//   "train":  { "total_env_steps", "checkpoint_period", "eval_scenarios", "d" },
//   "ayss":   { "max_headway", "min_ttc", "require_lane_change", "require_rear_ahead",
//               "n_samples", "bin_width", "n_episodes", "majority", "min_records",
//               "headway_low", "headway_high" },
//   "output_dir": "runs"
// }

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ayss/dqn.hpp"
#include "ayss/eval.hpp"
#include "ayss/sim.hpp"
#include "ayss/ssm.hpp"
#include "ayss/training.hpp"
#include "ayss/vut.hpp"

namespace ayss::config {

inline constexpr int kSchemaVersion = 1;

struct AyssSettings {
  eval::AyssFilterConfig filter;
  long n_samples = 100000;
  double bin_width = 0.25;
  int n_episodes = 200;
  eval::CompareOptions compare;
};

struct ExperimentConfig {
  sim::Case scenario_case = sim::Case::one_lane;
  std::vector<vut::VutSpec> vuts;
  std::vector<std::uint64_t> seeds;
  sim::SimConfig sim;
  ssm::RewardConfig reward;
  rl::DqnHyperparams dqn;
  train::TrainRunConfig train;  // case, vut_id and seed are filled per run
  AyssSettings ayss;
  std::string output_dir = "runs";

  /// Throws ConfigError on the first violated constraint.
  void validate() const;
  const vut::VutSpec& vut(const std::string& id) const;
  train::TrainRunConfig run_config(const std::string& vut_id, std::uint64_t seed) const;
};

/// Default experiment: pi1 and pi2, seeds {0, 1, 2}.
ExperimentConfig default_config(sim::Case c);

ExperimentConfig from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);

ExperimentConfig load(const std::filesystem::path& path);
void save(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// FNV-1a 64 of the canonical dump (sorted keys, output_dir excluded).
std::uint64_t config_hash(const ExperimentConfig& cfg);
std::string hash_hex(std::uint64_t hash);

}  // namespace ayss::config
