#pragma once

// Double dueling DQN with prioritized replay.

#include <Eigen/Core>
#include <span>
#include <vector>

#include "ayss/nn.hpp"
#include "ayss/replay.hpp"
#include "ayss/sim.hpp"

namespace ayss::rl {

struct DqnHyperparams {
  double gamma = 0.8;
  double learning_rate = 1e-5;
  int hidden = 256;
  int batch_size = 64;
  int buffer_capacity = 100000;
  int target_update_period = 500;  // gradient steps between hard target copies
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_steps = 20000;  // environment steps
  double alpha = 0.6;
  double beta0 = 0.4;
  int beta_anneal_steps = 0;  // 0: anneal over the whole run
  double epsilon_p = 1e-6;
  double update_per_step = 0.5;   // gradient steps per collected environment step
  int warmup_steps = 1000;        // environment steps before the first update

  void validate() const;
  double epsilon_at(long env_step) const;
  double beta_at(long env_step, long total_steps) const;
};

/// Normalized network input: speeds / 40, headway / 100, lane flag unchanged.
Eigen::VectorXd features(const sim::Observation& obs);
Matrix feature_batch(std::span<const sim::Observation> obs);

Eigen::VectorXd q_values(const DuelingNet& net, const sim::Observation& obs);

/// Lowest index wins ties.
int argmax(std::span<const double> q);
int greedy_action(const DuelingNet& net, const sim::Observation& obs);

/// Uniform random action with probability epsilon, greedy otherwise.
int epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng);

/// r if done, else r + gamma Q_target(s', argmax_a Q_online(s', a)).
double double_dqn_target(const sim::Transition& t, const DuelingNet& online,
                         const DuelingNet& target, double gamma);

/// (1/B) sum_i w_i (Q(s_i, a_i) - y_i)^2. When grads is given it is zeroed and
/// filled with the gradient; td_errors (if given) receives y_i - Q(s_i, a_i).
double weighted_td_loss(const DuelingNet& net, const Matrix& obs, std::span<const int> actions,
                        std::span<const double> targets, std::span<const double> weights,
                        DuelingNet* grads, std::vector<double>* td_errors = nullptr);

struct TrainStepResult {
  double loss = 0.0;
  std::vector<std::size_t> indices;
  std::vector<double> td_errors;
};

/// Owns the online/target networks and the optimizer of one training run.
class DqnLearner {
 public:
  DqnLearner(int obs_dim, int action_count, const DqnHyperparams& hp, Rng& init_rng);

  /// One prioritized batch update. Copies online -> target every
  /// target_update_period updates.
  TrainStepResult train_step(PrioritizedBuffer& buffer, double beta, Rng& rng);

  const DuelingNet& online() const { return online_; }
  const DuelingNet& target() const { return target_; }
  DuelingNet& online() { return online_; }
  long updates() const { return updates_; }
  const DqnHyperparams& hyperparams() const { return hp_; }

 private:
  DqnHyperparams hp_;
  DuelingNet online_, target_, grads_;
  Adam adam_;
  long updates_ = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int excluded_kinks = 0;
};

/// Central finite differences against backpropagation on every parameter of
/// the weighted TD loss. Parameters whose perturbation flips a ReLU are
/// excluded and counted.
GradCheckResult gradient_check(DuelingNet& net, const Matrix& obs, std::span<const int> actions,
                               std::span<const double> targets, std::span<const double> weights,
                               double step = 1e-6);

/// Same check for a plain network under the loss sum ||f(x) - y||^2.
GradCheckResult gradient_check(Mlp& net, const Matrix& x, const Matrix& y, double step = 1e-6);

}  // namespace ayss::rl
