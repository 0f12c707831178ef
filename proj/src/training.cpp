#include "ayss/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ayss/error.hpp"
#include "ayss/kernels.hpp"

namespace ayss::train {

void TrainRunConfig::validate() const {
  if (total_env_steps <= 0) throw ConfigError("train.total_env_steps must be positive");
  if (checkpoint_period <= 0) throw ConfigError("train.checkpoint_period must be positive");
  if (total_env_steps % checkpoint_period != 0) {
    throw ConfigError("train.checkpoint_period must divide train.total_env_steps");
  }
  if (eval_scenarios < 1) throw ConfigError("train.eval_scenarios must be at least 1");
  if (d < 1) throw ConfigError("train.d must be at least 1");
}

ScenarioGenerator::ScenarioGenerator(sim::Scene scene, std::string vut_id,
                                     std::uint64_t scenario_seed)
    : vut_id_(std::move(vut_id)), env_(std::move(scene)), rng_(scenario_seed) {}

ScenarioGenerator::Burst ScenarioGenerator::generate(const sim::PovPolicy& pov, int d,
                                                     long pov_version) {
  if (d < 1) throw std::invalid_argument("burst length d must be at least 1");
  const sim::Scene& scene = env_.scene();
  while (env_.episode_over()) {
    current_ = sim::sample_initial_condition(rng_, scene.sim, scene.scenario_case);
    env_.reset(current_);
    ++episodes_;
  }
  Burst burst;
  burst.scenario.vut_id = vut_id_;
  burst.scenario.road = scene.road;
  burst.scenario.initial = current_;
  burst.scenario.pov_version = pov_version;
  for (int k = 0; k < d && !env_.episode_over(); ++k) {
    sim::Transition t;
    t.obs = env_.observation();
    t.action = pov(t.obs);
    const sim::StepOutcome out = env_.step(t.action);
    t.reward = out.reward;
    t.next_obs = out.next_obs;
    t.done = out.collided;
    burst.scenario.observations.push_back(t.obs);
    burst.scenario.actions.push_back(t.action);
    burst.transitions.push_back(t);
  }
  return burst;
}

sim::Scene make_scene(sim::Case c, const sim::SimConfig& sim_cfg, const ssm::RewardConfig& reward,
                      const vut::VutSpec& vut) {
  sim::Scene scene;
  scene.scenario_case = c;
  scene.road = sim::RoadConfig::for_case(c);
  scene.sim = sim_cfg;
  scene.vut = vut::make_idm_policy(vut.params, sim_cfg.accel_bounds);
  ssm::RewardConfig rc = reward;
  rc.scenario_case = c;
  scene.reward = ssm::make_reward_fn(scene.road, rc);
  return scene;
}

std::vector<sim::InitialCondition> evaluation_starts(const sim::SimConfig& sim_cfg, sim::Case c,
                                                     std::uint64_t stream_seed, int count) {
  Rng rng(stream_seed);
  std::vector<sim::InitialCondition> starts;
  starts.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) starts.push_back(sim::sample_initial_condition(rng, sim_cfg, c));
  return starts;
}

CandidateScore evaluate_candidate(const rl::DuelingNet& net, const sim::Scene& scene,
                                  std::span<const sim::InitialCondition> starts) {
  const auto summaries = kernels::omp::rollout_greedy(scene, net, starts);
  CandidateScore score;
  if (summaries.empty()) return score;
  int crashes = 0;
  for (const auto& s : summaries) {
    score.mean_episode_reward += s.episode_reward;
    crashes += s.collided ? 1 : 0;
  }
  score.mean_episode_reward /= static_cast<double>(summaries.size());
  score.crash_rate = 100.0 * crashes / static_cast<double>(summaries.size());
  return score;
}

TrainResult train_pov(const TrainRunConfig& run, const sim::SimConfig& sim_cfg,
                      const ssm::RewardConfig& reward, const rl::DqnHyperparams& hp,
                      const vut::VutSpec& vut, std::uint64_t config_hash,
                      const CheckpointCallback& on_checkpoint) {
  run.validate();
  sim_cfg.validate();
  hp.validate();
  const sim::Scene scene = make_scene(run.scenario_case, sim_cfg, reward, vut);
  const int obs_dim = run.scenario_case == sim::Case::one_lane ? 3 : 4;
  const int n_actions = sim::action_count(run.scenario_case);

  Rng init_rng(stream_seed(run.seed, kStreamInit));
  Rng explore_rng(stream_seed(run.seed, kStreamExplore));
  Rng replay_rng(stream_seed(run.seed, kStreamReplay));
  rl::DqnLearner learner(obs_dim, n_actions, hp, init_rng);
  rl::PrioritizedBuffer buffer(static_cast<std::size_t>(hp.buffer_capacity), hp.alpha,
                               hp.epsilon_p);
  ScenarioGenerator generator(scene, run.vut_id, stream_seed(run.seed, kStreamScenario));
  const auto eval_starts = evaluation_starts(sim_cfg, run.scenario_case,
                                             stream_seed(run.seed, kStreamEval),
                                             run.eval_scenarios);

  TrainResult result;
  long env_step = 0;
  double update_credit = 0.0;
  const sim::PovPolicy explore = [&](const sim::Observation& obs) {
    const Eigen::VectorXd q = rl::q_values(learner.online(), obs);
    const double eps = hp.epsilon_at(env_step);
    ++env_step;
    return rl::epsilon_greedy(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())),
                              eps, explore_rng);
  };

  while (env_step < run.total_env_steps) {
    const long next_checkpoint = (env_step / run.checkpoint_period + 1) * run.checkpoint_period;
    const int d = static_cast<int>(std::min<long>(run.d, next_checkpoint - env_step));
    auto burst = generator.generate(explore, d, learner.updates());
    for (const auto& t : burst.transitions) buffer.add(t);
    result.provenance.push_back({run.vut_id, burst.scenario.pov_version, burst.transitions.size()});

    if (env_step >= hp.warmup_steps && buffer.size() >= static_cast<std::size_t>(hp.batch_size)) {
      update_credit += hp.update_per_step * static_cast<double>(burst.transitions.size());
      const double beta = hp.beta_at(env_step, run.total_env_steps);
      while (update_credit >= 1.0) {
        const auto step = learner.train_step(buffer, beta, replay_rng);
        if (!std::isfinite(step.loss)) {
          throw RuntimeError("training diverged: non-finite loss at environment step " +
                             std::to_string(env_step));
        }
        update_credit -= 1.0;
      }
    }

    if (env_step == next_checkpoint) {
      rl::PolicyCheckpoint ckpt;
      ckpt.scenario_case = run.scenario_case;
      ckpt.step_index = static_cast<std::uint64_t>(env_step);
      ckpt.seed = run.seed;
      ckpt.config_hash = config_hash;
      ckpt.net = learner.online();
      const CandidateScore score = evaluate_candidate(ckpt.net, scene, eval_starts);
      ckpt.eval_mean_episode_reward = score.mean_episode_reward;
      ckpt.eval_crash_rate = score.crash_rate;
      if (on_checkpoint) on_checkpoint(ckpt);
      result.checkpoints.push_back(std::move(ckpt));
    }
  }
  result.env_steps = env_step;
  result.updates = learner.updates();
  result.episodes = generator.episodes_started();
  return result;
}

std::size_t select_spcp(std::span<const rl::PolicyCheckpoint> candidates) {
  if (candidates.empty()) throw std::invalid_argument("select_spcp: no candidates");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const auto& b = candidates[best];
    if (c.eval_mean_episode_reward > b.eval_mean_episode_reward ||
        (c.eval_mean_episode_reward == b.eval_mean_episode_reward && c.step_index < b.step_index)) {
      best = i;
    }
  }
  return best;
}

}  // namespace ayss::train
