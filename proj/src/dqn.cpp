#include "ayss/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "ayss/error.hpp"

namespace ayss::rl {

void DqnHyperparams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("dqn.gamma must lie in (0, 1)");
  if (!(learning_rate > 0.0)) throw ConfigError("dqn.learning_rate must be positive");
  if (hidden < 1 || batch_size < 1 || buffer_capacity < 1 || target_update_period < 1) {
    throw ConfigError("dqn sizes and periods must be positive");
  }
  if (batch_size > buffer_capacity) throw ConfigError("dqn.batch_size exceeds buffer capacity");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("dqn epsilon schedule must lie in [0, 1]");
  }
  if (epsilon_decay_steps < 0 || beta_anneal_steps < 0 || warmup_steps < 0) {
    throw ConfigError("dqn step counts must be non-negative");
  }
  if (!(alpha >= 0.0) || !(beta0 >= 0.0 && beta0 <= 1.0) || !(epsilon_p > 0.0)) {
    throw ConfigError("dqn prioritized replay parameters out of range");
  }
  if (!(update_per_step > 0.0)) throw ConfigError("dqn.update_per_step must be positive");
}

double DqnHyperparams::epsilon_at(long env_step) const {
  if (epsilon_decay_steps == 0) return epsilon_end;
  const double frac = std::min(1.0, static_cast<double>(env_step) / epsilon_decay_steps);
  return epsilon_start + frac * (epsilon_end - epsilon_start);
}

double DqnHyperparams::beta_at(long env_step, long total_steps) const {
  const long span = beta_anneal_steps > 0 ? beta_anneal_steps : total_steps;
  if (span <= 0) return 1.0;
  const double frac = std::min(1.0, static_cast<double>(env_step) / static_cast<double>(span));
  return beta0 + frac * (1.0 - beta0);
}

// ---------------------------------------------------------------------------

Eigen::VectorXd features(const sim::Observation& obs) {
  Eigen::VectorXd f(obs.dim);
  f(0) = obs.pov_speed / 40.0;
  f(1) = obs.vut_speed / 40.0;
  f(2) = obs.headway / 100.0;
  if (obs.dim == 4) f(3) = obs.same_lane;
  return f;
}

Matrix feature_batch(std::span<const sim::Observation> obs) {
  if (obs.empty()) return Matrix(0, 0);
  Matrix m(obs.front().dim, static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = features(obs[i]);
  return m;
}

Eigen::VectorXd q_values(const DuelingNet& net, const sim::Observation& obs) {
  return net.q_values(features(obs)).col(0);
}

int argmax(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("argmax of an empty Q vector");
  int best = 0;
  for (std::size_t a = 1; a < q.size(); ++a) {
    if (q[a] > q[best]) best = static_cast<int>(a);
  }
  return best;
}

int greedy_action(const DuelingNet& net, const sim::Observation& obs) {
  const Eigen::VectorXd q = q_values(net, obs);
  return argmax(std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

int epsilon_greedy(std::span<const double> q, double epsilon, Rng& rng) {
  if (q.empty()) throw std::invalid_argument("epsilon_greedy on an empty Q vector");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon outside [0, 1]");
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return static_cast<int>(uniform_index(rng, q.size()));
  }
  return argmax(q);
}

double double_dqn_target(const sim::Transition& t, const DuelingNet& online,
                         const DuelingNet& target, double gamma) {
  if (t.done) return t.reward;
  const Eigen::VectorXd q_online = q_values(online, t.next_obs);
  const Eigen::VectorXd q_target = q_values(target, t.next_obs);
  const int a = argmax(std::span<const double>(q_online.data(), q_online.size()));
  return t.reward + gamma * q_target(a);
}

double weighted_td_loss(const DuelingNet& net, const Matrix& obs, std::span<const int> actions,
                        std::span<const double> targets, std::span<const double> weights,
                        DuelingNet* grads, std::vector<double>* td_errors) {
  const Eigen::Index batch = obs.cols();
  if (static_cast<std::size_t>(batch) != actions.size() || actions.size() != targets.size() ||
      targets.size() != weights.size()) {
    throw std::invalid_argument("weighted_td_loss: batch sizes disagree");
  }
  DuelingNet::Cache cache;
  const Matrix q = net.q_values(obs, cache);
  Matrix grad_q = Matrix::Zero(q.rows(), q.cols());
  double loss = 0.0;
  if (td_errors) td_errors->assign(static_cast<std::size_t>(batch), 0.0);
  for (Eigen::Index i = 0; i < batch; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    if (a < 0 || a >= q.rows()) throw std::out_of_range("action index outside the Q vector");
    const double td = targets[static_cast<std::size_t>(i)] - q(a, i);
    const double w = weights[static_cast<std::size_t>(i)];
    loss += w * td * td;
    grad_q(a, i) = -2.0 * w * td / static_cast<double>(batch);
    if (td_errors) (*td_errors)[static_cast<std::size_t>(i)] = td;
  }
  loss /= static_cast<double>(batch);
  if (grads) {
    grads->set_zero();
    net.backward(cache, grad_q, *grads);
  }
  return loss;
}

// ---------------------------------------------------------------------------

DqnLearner::DqnLearner(int obs_dim, int action_count, const DqnHyperparams& hp, Rng& init_rng)
    : hp_(hp),
      online_(obs_dim, action_count, hp.hidden),
      target_(obs_dim, action_count, hp.hidden),
      grads_(obs_dim, action_count, hp.hidden),
      adam_(hp.learning_rate) {
  hp_.validate();
  online_.init(init_rng);
  target_ = online_;
}

TrainStepResult DqnLearner::train_step(PrioritizedBuffer& buffer, double beta, Rng& rng) {
  if (buffer.size() == 0) throw std::logic_error("train_step on an empty replay buffer");
  const auto batch = buffer.sample(static_cast<std::size_t>(hp_.batch_size), beta, rng);
  const std::size_t n = batch.indices.size();
  const int dim = online_.obs_dim();

  Matrix obs(dim, static_cast<Eigen::Index>(n));
  Matrix next(dim, static_cast<Eigen::Index>(n));
  std::vector<int> actions(n);
  for (std::size_t k = 0; k < n; ++k) {
    const sim::Transition& t = buffer.at(batch.indices[k]);
    obs.col(static_cast<Eigen::Index>(k)) = features(t.obs);
    next.col(static_cast<Eigen::Index>(k)) = features(t.next_obs);
    actions[k] = t.action;
  }

  // Double DQN: select with the online net, evaluate with the target net.
  const Matrix q_next_online = online_.q_values(next);
  const Matrix q_next_target = target_.q_values(next);
  std::vector<double> targets(n);
  for (std::size_t k = 0; k < n; ++k) {
    const sim::Transition& t = buffer.at(batch.indices[k]);
    if (t.done) {
      targets[k] = t.reward;
      continue;
    }
    const auto col = static_cast<Eigen::Index>(k);
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q_next_online.rows(); ++a) {
      if (q_next_online(a, col) > q_next_online(best, col)) best = a;
    }
    targets[k] = t.reward + hp_.gamma * q_next_target(best, col);
  }

  TrainStepResult result;
  result.loss =
      weighted_td_loss(online_, obs, actions, targets, batch.weights, &grads_, &result.td_errors);
  if (!std::isfinite(result.loss)) return result;
  adam_.step(online_, grads_);
  buffer.update_priorities(batch.indices, result.td_errors);
  result.indices = batch.indices;

  ++updates_;
  if (updates_ % hp_.target_update_period == 0) target_ = online_;
  return result;
}

// ---------------------------------------------------------------------------

namespace {

// ReLU on/off pattern of every hidden unit for the given forward pass.
void append_pattern(const Mlp& net, const Mlp::Cache& cache, std::vector<bool>& out) {
  for (std::size_t k = 0; k < cache.pre.size(); ++k) {
    if (k + 1 == cache.pre.size() && !net.relu_output()) break;
    const Matrix& z = cache.pre[k];
    for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z.data()[i] > 0.0);
  }
}

template <typename Net>
GradCheckResult finite_difference_check(
    Net& net, const std::function<double(const Net&, Net*, std::vector<bool>*)>& loss_fn,
    Net grads, double step) {
  std::vector<bool> base_pattern;
  loss_fn(net, &grads, &base_pattern);
  std::vector<Matrix*> params = net.tensors();
  std::vector<const Matrix*> analytic = std::as_const(grads).tensors();

  GradCheckResult result;
  std::vector<bool> plus_pattern, minus_pattern;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Matrix& m = *params[p];
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double orig = m.data()[i];
      m.data()[i] = orig + step;
      plus_pattern.clear();
      const double lp = loss_fn(net, nullptr, &plus_pattern);
      m.data()[i] = orig - step;
      minus_pattern.clear();
      const double lm = loss_fn(net, nullptr, &minus_pattern);
      m.data()[i] = orig;
      if (plus_pattern != base_pattern || minus_pattern != base_pattern) {
        ++result.excluded_kinks;
        continue;
      }
      const double numeric = (lp - lm) / (2.0 * step);
      const double exact = analytic[p]->data()[i];
      const double denom = std::max({std::abs(numeric), std::abs(exact), 1e-5});
      result.max_rel_error = std::max(result.max_rel_error, std::abs(numeric - exact) / denom);
      ++result.checked;
    }
  }
  return result;
}

// Mlp has no tensors() member; adapt it.
struct MlpView {
  Mlp* net;
  std::vector<Matrix*> tensors() {
    std::vector<Matrix*> out;
    net->collect(out);
    return out;
  }
  std::vector<const Matrix*> tensors() const {
    std::vector<const Matrix*> out;
    std::as_const(*net).collect(out);
    return out;
  }
};

}  // namespace

GradCheckResult gradient_check(DuelingNet& net, const Matrix& obs, std::span<const int> actions,
                               std::span<const double> targets, std::span<const double> weights,
                               double step) {
  auto loss_fn = [&](const DuelingNet& n, DuelingNet* grads, std::vector<bool>* pattern) {
    if (pattern) {
      DuelingNet::Cache cache;
      n.q_values(obs, cache);
      append_pattern(n.feature(), cache.feature, *pattern);
      append_pattern(n.value(), cache.value, *pattern);
      append_pattern(n.advantage(), cache.advantage, *pattern);
    }
    return weighted_td_loss(n, obs, actions, targets, weights, grads);
  };
  return finite_difference_check<DuelingNet>(net, loss_fn, net, step);
}

GradCheckResult gradient_check(Mlp& net, const Matrix& x, const Matrix& y, double step) {
  Mlp grads = net;
  MlpView view{&net};
  MlpView grad_view{&grads};
  auto loss_fn = [&](const MlpView& v, MlpView* g, std::vector<bool>* pattern) {
    Mlp::Cache cache;
    const Matrix out = v.net->forward(x, cache);
    if (pattern) append_pattern(*v.net, cache, *pattern);
    const Matrix diff = out - y;
    if (g) {
      g->net->set_zero();
      v.net->backward(cache, 2.0 * diff, *g->net);
    }
    return diff.squaredNorm();
  };
  return finite_difference_check<MlpView>(view, loss_fn, grad_view, step);
}

}  // namespace ayss::rl
