#include <doctest.h>

#include <set>

#include "ayss/error.hpp"
#include "ayss/training.hpp"

using namespace ayss;

namespace {

sim::Scene one_lane_scene() {
  return train::make_scene(sim::Case::one_lane, sim::SimConfig{}, ssm::RewardConfig{},
                           vut::preset("pi1"));
}

rl::DqnHyperparams tiny_hyperparams() {
  rl::DqnHyperparams hp;
  hp.hidden = 16;
  hp.batch_size = 8;
  hp.buffer_capacity = 1000;
  hp.warmup_steps = 50;
  hp.epsilon_decay_steps = 200;
  hp.target_update_period = 20;
  hp.learning_rate = 1e-3;
  return hp;
}

train::TrainRunConfig tiny_run(long total, long period) {
  train::TrainRunConfig run;
  run.total_env_steps = total;
  run.checkpoint_period = period;
  run.eval_scenarios = 5;
  return run;
}

rl::PolicyCheckpoint scored(double reward, std::uint64_t step) {
  rl::PolicyCheckpoint c;
  c.eval_mean_episode_reward = reward;
  c.step_index = step;
  return c;
}

}  // namespace

TEST_SUITE("training") {
  TEST_CASE("a burst of d = 25 covers a full episode") {
    train::ScenarioGenerator gen(one_lane_scene(), "pi1", 1);
    const auto burst = gen.generate([](const sim::Observation&) { return 2; }, 25);
    CHECK(burst.scenario.vut_id == "pi1");
    CHECK(burst.transitions.size() == burst.scenario.actions.size());
    CHECK(burst.transitions.size() >= 1);
    CHECK(burst.transitions.size() <= 25);
    if (!burst.transitions.back().done) CHECK(burst.transitions.size() == 25);
    CHECK(gen.episodes_started() == 1);
  }

  TEST_CASE("short bursts continue the running episode") {
    // Full-speed-away POV: no collision, so 25 bursts of one step form one episode.
    const auto flee = [](const sim::Observation&) { return 20; };
    train::ScenarioGenerator reference(one_lane_scene(), "pi1", 3);
    const auto whole = reference.generate(flee, 25);
    REQUIRE(whole.transitions.size() == 25);

    train::ScenarioGenerator gen(one_lane_scene(), "pi1", 3);
    for (int k = 0; k < 25; ++k) {
      const auto burst = gen.generate(flee, 1, k);
      REQUIRE(burst.transitions.size() == 1);
      CHECK(burst.scenario.pov_version == k);
      CHECK(burst.transitions[0].obs.headway == whole.transitions[k].obs.headway);
      CHECK(burst.transitions[0].reward == whole.transitions[k].reward);
      CHECK(gen.episodes_started() == 1);
    }
    gen.generate(flee, 1);
    CHECK(gen.episodes_started() == 2);
  }

  TEST_CASE("a collision ends the episode and the next burst starts fresh") {
    const auto ram = [](const sim::Observation&) { return 0; };
    train::ScenarioGenerator gen(one_lane_scene(), "pi1", 7);
    const auto first = gen.generate(ram, 25);
    if (first.transitions.back().done) {
      CHECK(gen.environment().episode_over());
      const auto second = gen.generate(ram, 25);
      CHECK(gen.episodes_started() == 2);
      CHECK(second.scenario.initial.gap != first.scenario.initial.gap);
    }
    CHECK_THROWS_AS(gen.generate(ram, 0), std::invalid_argument);
  }

  TEST_CASE("checkpoint count equals total steps over the period") {
    const auto run = tiny_run(300, 100);
    const auto result = train::train_pov(run, sim::SimConfig{}, ssm::RewardConfig{},
                                         tiny_hyperparams(), vut::preset("pi1"), 0xabc);
    REQUIRE(result.checkpoints.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(result.checkpoints[i].step_index == 100 * (i + 1));
      CHECK(result.checkpoints[i].config_hash == 0xabc);
      CHECK(result.checkpoints[i].scenario_case == sim::Case::one_lane);
    }
    CHECK(result.env_steps == 300);
    CHECK(result.updates > 0);
    std::size_t provenance_total = 0;
    for (const auto& p : result.provenance) {
      CHECK(p.vut_id == "pi1");
      provenance_total += p.transitions;
    }
    CHECK(provenance_total == 300);
  }

  TEST_CASE("training is deterministic for a fixed seed") {
    const auto run = tiny_run(200, 100);
    std::vector<long> callback_steps;
    const auto a = train::train_pov(run, sim::SimConfig{}, ssm::RewardConfig{}, tiny_hyperparams(),
                                    vut::preset("pi1"), 0,
                                    [&](const rl::PolicyCheckpoint& c) {
                                      callback_steps.push_back(static_cast<long>(c.step_index));
                                    });
    const auto b = train::train_pov(run, sim::SimConfig{}, ssm::RewardConfig{}, tiny_hyperparams(),
                                    vut::preset("pi1"));
    CHECK(callback_steps == std::vector<long>{100, 200});
    REQUIRE(a.checkpoints.size() == b.checkpoints.size());
    for (std::size_t i = 0; i < a.checkpoints.size(); ++i) {
      CHECK(a.checkpoints[i].eval_mean_episode_reward == b.checkpoints[i].eval_mean_episode_reward);
      CHECK(a.checkpoints[i].eval_crash_rate == b.checkpoints[i].eval_crash_rate);
    }
  }

  TEST_CASE("candidate evaluation is pure") {
    Rng rng(1);
    rl::DuelingNet net(3, sim::action_count(sim::Case::one_lane), 16);
    net.init(rng);
    const auto scene = one_lane_scene();
    const auto starts = train::evaluation_starts(scene.sim, sim::Case::one_lane, 5, 10);
    const auto a = train::evaluate_candidate(net, scene, starts);
    const auto b = train::evaluate_candidate(net, scene, starts);
    CHECK(a.mean_episode_reward == b.mean_episode_reward);
    CHECK(a.crash_rate == b.crash_rate);
    CHECK(a.crash_rate >= 0.0);
    CHECK(a.crash_rate <= 100.0);
  }

  TEST_CASE("evaluation starts depend only on the stream seed") {
    const sim::SimConfig cfg;
    const auto a = train::evaluation_starts(cfg, sim::Case::one_lane, 11, 20);
    const auto b = train::evaluation_starts(cfg, sim::Case::one_lane, 11, 20);
    const auto c = train::evaluation_starts(cfg, sim::Case::one_lane, 12, 20);
    REQUIRE(a.size() == 20);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].gap == b[i].gap);
    CHECK(a[0].gap != c[0].gap);
  }

  TEST_CASE("SPCP selection") {
    const std::vector<rl::PolicyCheckpoint> three{scored(2.0, 1), scored(5.0, 2), scored(3.0, 3)};
    CHECK(train::select_spcp(three) == 1);
    const std::vector<rl::PolicyCheckpoint> one{scored(-4.0, 7)};
    CHECK(train::select_spcp(one) == 0);
    const std::vector<rl::PolicyCheckpoint> tie{scored(4.0, 1), scored(4.0, 2)};
    CHECK(train::select_spcp(tie) == 0);
    CHECK_THROWS(train::select_spcp(std::vector<rl::PolicyCheckpoint>{}));
  }

  TEST_CASE("run config validation") {
    CHECK_NOTHROW(tiny_run(300, 100).validate());
    CHECK_THROWS_AS(tiny_run(300, 70).validate(), ConfigError);
    CHECK_THROWS_AS(tiny_run(0, 100).validate(), ConfigError);
    auto run = tiny_run(300, 100);
    run.d = 0;
    CHECK_THROWS_AS(run.validate(), ConfigError);
  }
}
