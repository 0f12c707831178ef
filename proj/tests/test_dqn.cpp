#include <doctest.h>

#include <array>
#include <vector>

#include "ayss/dqn.hpp"
#include "ayss/error.hpp"
#include "tabular.hpp"

using namespace ayss;
using namespace ayss::rl;

namespace {

sim::Transition transition(int s, int a, double r, int s_next, bool done) {
  sim::Transition t;
  t.obs = tabular::state(s);
  t.action = a;
  t.reward = r;
  t.next_obs = tabular::state(s_next);
  t.done = done;
  return t;
}

DqnHyperparams small_hyperparams() {
  DqnHyperparams hp;
  hp.hidden = 8;
  hp.batch_size = 1;
  hp.buffer_capacity = 4;
  hp.learning_rate = 1e-3;
  hp.target_update_period = 1000000;
  return hp;
}

}  // namespace

TEST_SUITE("dqn") {
  TEST_CASE("tabular nets reproduce their table") {
    const tabular::Table q{{{0.0, 2.0}, {5.0, 3.0}, {-1.5, 4.25}}};
    const DuelingNet net = tabular::net_for(q);
    for (int s = 0; s < 3; ++s) {
      const Eigen::VectorXd row = q_values(net, tabular::state(s));
      CHECK(row(0) == q[s][0]);
      CHECK(row(1) == q[s][1]);
    }
  }

  TEST_CASE("double DQN target selects with online and evaluates with target") {
    // Q_online(s') = [0, 2] picks action 1; Q_target(s') = [5, 3] scores it.
    const DuelingNet online = tabular::net_for({{{0.0, 2.0}, {0.0, 0.0}, {0.0, 0.0}}});
    const DuelingNet target = tabular::net_for({{{5.0, 3.0}, {0.0, 0.0}, {0.0, 0.0}}});
    const double y = double_dqn_target(transition(1, 0, 1.0, 0, false), online, target, 0.8);
    CHECK(y == 1.0 + 0.8 * 3.0);
    CHECK(y == doctest::Approx(3.4).epsilon(1e-15));
  }

  TEST_CASE("terminal transitions bootstrap nothing") {
    const DuelingNet net = tabular::net_for({{{7.0, 9.0}, {7.0, 9.0}, {7.0, 9.0}}});
    CHECK(double_dqn_target(transition(0, 1, -25.0, 2, true), net, net, 0.8) == -25.0);
  }

  TEST_CASE("identical online and target nets give the vanilla max target") {
    const tabular::Table q{{{0.5, -2.0}, {3.0, 3.25}, {-4.0, -1.0}}};
    const DuelingNet net = tabular::net_for(q);
    for (int s = 0; s < 3; ++s) {
      const double y = double_dqn_target(transition(0, 0, 0.25, s, false), net, net, 0.8);
      CHECK(y == 0.25 + 0.8 * std::max(q[s][0], q[s][1]));
    }
  }

  TEST_CASE("3-state 2-action tabular MDP targets match hand enumeration") {
    const tabular::Table online{{{1.0, 4.0}, {2.5, -0.5}, {-3.0, -3.0}}};
    const tabular::Table target{{{6.0, -2.0}, {0.75, 8.0}, {1.5, 2.0}}};
    const DuelingNet on = tabular::net_for(online);
    const DuelingNet tg = tabular::net_for(target);
    const double gamma = 0.8;

    // Online argmax per next state: s0 -> 1, s1 -> 0, s2 -> 0 (tie, lowest index).
    // Target value of that action: s0 -> -2, s1 -> 0.75, s2 -> 1.5.
    const std::array<double, 3> bootstrap{-2.0, 0.75, 1.5};
    const std::array<double, 3> rewards{1.0, -0.5, 2.0};
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) {
        for (int s_next = 0; s_next < 3; ++s_next) {
          for (int r = 0; r < 3; ++r) {
            const auto live = transition(s, a, rewards[r], s_next, false);
            CHECK(double_dqn_target(live, on, tg, gamma) == rewards[r] + gamma * bootstrap[s_next]);
            const auto terminal = transition(s, a, rewards[r], s_next, true);
            CHECK(double_dqn_target(terminal, on, tg, gamma) == rewards[r]);
          }
        }
      }
    }
  }

  TEST_CASE("epsilon-greedy examples") {
    Rng rng(1);
    const std::vector<double> q{1.0, 5.0, 3.0};
    CHECK(epsilon_greedy(q, 0.0, rng) == 1);
    const std::vector<double> tie{2.0, 2.0};
    CHECK(epsilon_greedy(tie, 0.0, rng) == 0);
    CHECK_THROWS_AS(epsilon_greedy(std::vector<double>{}, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(epsilon_greedy(q, 1.5, rng), std::invalid_argument);
    CHECK_THROWS_AS(argmax(std::vector<double>{}), std::invalid_argument);
  }

  TEST_CASE("fully random epsilon-greedy is uniform") {
    Rng rng(2024);
    const std::vector<double> q{0.0, 10.0, -3.0};
    std::array<int, 3> counts{};
    constexpr int kDraws = 100000;
    for (int i = 0; i < kDraws; ++i) ++counts[epsilon_greedy(q, 1.0, rng)];
    for (int c : counts) CHECK(std::abs(c / double(kDraws) - 1.0 / 3.0) <= 0.01);
  }

  TEST_CASE("epsilon and beta schedules") {
    DqnHyperparams hp;
    hp.epsilon_start = 1.0;
    hp.epsilon_end = 0.05;
    hp.epsilon_decay_steps = 100;
    CHECK(hp.epsilon_at(0) == 1.0);
    CHECK(hp.epsilon_at(50) == doctest::Approx(0.525));
    CHECK(hp.epsilon_at(100) == doctest::Approx(0.05));
    CHECK(hp.epsilon_at(1000) == doctest::Approx(0.05));
    hp.beta0 = 0.4;
    CHECK(hp.beta_at(0, 1000) == doctest::Approx(0.4));
    CHECK(hp.beta_at(500, 1000) == doctest::Approx(0.7));
    CHECK(hp.beta_at(2000, 1000) == doctest::Approx(1.0));
  }

  TEST_CASE("hyperparameter validation") {
    DqnHyperparams hp;
    CHECK_NOTHROW(hp.validate());
    hp.gamma = 1.0;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    hp = DqnHyperparams{};
    hp.batch_size = hp.buffer_capacity + 1;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
    hp = DqnHyperparams{};
    hp.epsilon_p = 0.0;
    CHECK_THROWS_AS(hp.validate(), ConfigError);
  }

  TEST_CASE("train_step rejects an empty buffer") {
    Rng rng(0);
    const DqnHyperparams hp = small_hyperparams();
    DqnLearner learner(3, 2, hp, rng);
    PrioritizedBuffer buffer(4, hp.alpha, hp.epsilon_p);
    CHECK_THROWS_AS(learner.train_step(buffer, 0.4, rng), std::logic_error);
  }

  TEST_CASE("single transition with a fixed target converges") {
    Rng rng(5);
    const DqnHyperparams hp = small_hyperparams();
    DqnLearner learner(3, 2, hp, rng);
    PrioritizedBuffer buffer(4, hp.alpha, hp.epsilon_p);
    sim::Transition t;
    t.obs.pov_speed = 20.0;
    t.obs.vut_speed = 25.0;
    t.obs.headway = 30.0;
    t.action = 1;
    t.reward = 3.0;
    t.next_obs = t.obs;
    t.done = true;
    buffer.add(t);

    const double initial = learner.train_step(buffer, 1.0, rng).loss;
    REQUIRE(initial > 0.0);
    double loss = initial;
    double checkpoint = initial;
    long steps = 1;
    for (; steps < 100000 && loss >= 1e-6 * initial; ++steps) {
      loss = learner.train_step(buffer, 1.0, rng).loss;
      if (steps % 1000 == 0) {
        CHECK(loss <= checkpoint);
        checkpoint = loss;
      }
    }
    CHECK(loss < 1e-6 * initial);
    CHECK(steps < 100000);
  }

  TEST_CASE("train_step writes back |td| + epsilon_p priorities") {
    Rng rng(8);
    DqnHyperparams hp = small_hyperparams();
    hp.batch_size = 2;
    DqnLearner learner(3, 2, hp, rng);
    PrioritizedBuffer buffer(4, hp.alpha, hp.epsilon_p);
    buffer.add(transition(0, 0, 1.0, 1, false));
    buffer.add(transition(1, 1, -2.0, 2, true));
    const TrainStepResult res = learner.train_step(buffer, 0.4, rng);
    REQUIRE(res.indices.size() == 2);
    for (std::size_t k = 0; k < res.indices.size(); ++k) {
      CHECK(buffer.priority(res.indices[k]) ==
            doctest::Approx(std::abs(res.td_errors[k]) + hp.epsilon_p).epsilon(1e-12));
    }
    CHECK(learner.updates() == 1);
  }

  TEST_CASE("target network is a hard copy every period") {
    Rng rng(11);
    DqnHyperparams hp = small_hyperparams();
    hp.target_update_period = 3;
    DqnLearner learner(3, 2, hp, rng);
    PrioritizedBuffer buffer(4, hp.alpha, hp.epsilon_p);
    buffer.add(transition(0, 1, 1.0, 2, false));
    const Matrix x = feature_batch(std::vector<sim::Observation>{tabular::state(0)});
    const Matrix before = learner.target().q_values(x);
    learner.train_step(buffer, 1.0, rng);
    learner.train_step(buffer, 1.0, rng);
    CHECK(learner.target().q_values(x) == before);
    learner.train_step(buffer, 1.0, rng);
    CHECK(learner.target().q_values(x) == learner.online().q_values(x));
  }

  TEST_CASE("learners with equal seeds stay identical") {
    auto run = [] {
      Rng init(42), rng(43);
      DqnHyperparams hp = small_hyperparams();
      hp.batch_size = 2;
      DqnLearner learner(3, 2, hp, init);
      PrioritizedBuffer buffer(4, hp.alpha, hp.epsilon_p);
      buffer.add(transition(0, 0, 1.0, 1, false));
      buffer.add(transition(1, 1, 0.5, 2, false));
      buffer.add(transition(2, 0, -1.0, 0, true));
      for (int i = 0; i < 50; ++i) learner.train_step(buffer, 0.5, rng);
      return learner.online().q_values(Matrix::Identity(3, 3));
    };
    CHECK(run() == run());
  }
}
