#pragma once

// POV training: interleave scenario generation with DQN updates, snapshot SPCP
// candidates on a fixed cadence, score them, and select the SPCP.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ayss/checkpoint.hpp"
#include "ayss/dqn.hpp"
#include "ayss/sim.hpp"
#include "ayss/ssm.hpp"
#include "ayss/vut.hpp"

namespace ayss::train {

struct TrainRunConfig {
  sim::Case scenario_case = sim::Case::one_lane;
  std::string vut_id = "pi1";
  std::uint64_t seed = 0;
  long total_env_steps = 150000;
  long checkpoint_period = 10000;
  int eval_scenarios = 100;
  int d = 25;  // steps per generation burst before the policy is updated

  void validate() const;
};

/// {environment, initial condition, observation/action sequence}.
struct Scenario {
  std::string vut_id;
  sim::RoadConfig road;
  sim::InitialCondition initial;
  std::vector<sim::Observation> observations;
  std::vector<int> actions;
  long pov_version = 0;  // learner update count when the burst was generated
};

/// Keeps one world alive across bursts: a burst continues the running
/// episode and a new initial condition is drawn only once it has ended.
class ScenarioGenerator {
 public:
  ScenarioGenerator(sim::Scene scene, std::string vut_id, std::uint64_t scenario_seed);

  struct Burst {
    Scenario scenario;
    std::vector<sim::Transition> transitions;
  };

  Burst generate(const sim::PovPolicy& pov, int d, long pov_version = 0);

  long episodes_started() const { return episodes_; }
  const sim::Environment& environment() const { return env_; }

 private:
  std::string vut_id_;
  sim::Environment env_;
  Rng rng_;
  sim::InitialCondition current_{};
  long episodes_ = 0;
};

/// Everything needed to build the world for one VUT.
sim::Scene make_scene(sim::Case c, const sim::SimConfig& sim_cfg, const ssm::RewardConfig& reward,
                      const vut::VutSpec& vut);

/// Fixed evaluation starts for a run (dedicated RNG stream of the seed).
std::vector<sim::InitialCondition> evaluation_starts(const sim::SimConfig& sim_cfg, sim::Case c,
                                                     std::uint64_t stream_seed, int count);

struct CandidateScore {
  double mean_episode_reward = 0.0;
  double crash_rate = 0.0;  // percent
};

/// Greedy (exploration-free) evaluation on the given starts.
CandidateScore evaluate_candidate(const rl::DuelingNet& net, const sim::Scene& scene,
                                  std::span<const sim::InitialCondition> starts);

struct ProvenanceEntry {
  std::string vut_id;
  long pov_version = 0;
  std::size_t transitions = 0;
};

struct TrainResult {
  std::vector<rl::PolicyCheckpoint> checkpoints;
  std::vector<ProvenanceEntry> provenance;
  long env_steps = 0;
  long updates = 0;
  long episodes = 0;
};

using CheckpointCallback = std::function<void(const rl::PolicyCheckpoint&)>;

/// Throws RuntimeError when the loss becomes non-finite.
TrainResult train_pov(const TrainRunConfig& run, const sim::SimConfig& sim_cfg,
                      const ssm::RewardConfig& reward, const rl::DqnHyperparams& hp,
                      const vut::VutSpec& vut, std::uint64_t config_hash = 0,
                      const CheckpointCallback& on_checkpoint = {});

/// Highest mean evaluation reward; the earliest checkpoint wins ties.
std::size_t select_spcp(std::span<const rl::PolicyCheckpoint> candidates);

}  // namespace ayss::train
