#include "ayss/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ayss::rl {

Mlp::Mlp(std::vector<int> dims, bool relu_output)
    : dims_(std::move(dims)), relu_output_(relu_output) {
  if (dims_.size() < 2) throw std::invalid_argument("Mlp needs at least input and output dims");
  for (int d : dims_) {
    if (d <= 0) throw std::invalid_argument("Mlp layer dims must be positive");
  }
  layers_.resize(dims_.size() - 1);
  for (std::size_t i = 0; i + 1 < dims_.size(); ++i) {
    layers_[i].W = Matrix::Zero(dims_[i + 1], dims_[i]);
    layers_[i].b = Matrix::Zero(dims_[i + 1], 1);
  }
}

void Mlp::init_kaiming(Rng& rng) {
  // Uniform fan-in scaling, bound = sqrt(6 / fan_in); biases in +-1/sqrt(fan_in).
  for (DenseLayer& layer : layers_) {
    const double fan_in = static_cast<double>(layer.W.cols());
    const double wb = std::sqrt(6.0 / fan_in);
    const double bb = 1.0 / std::sqrt(fan_in);
    for (Eigen::Index c = 0; c < layer.W.cols(); ++c) {
      for (Eigen::Index r = 0; r < layer.W.rows(); ++r) layer.W(r, c) = uniform(rng, -wb, wb);
    }
    for (Eigen::Index r = 0; r < layer.b.rows(); ++r) layer.b(r, 0) = uniform(rng, -bb, bb);
  }
}

void Mlp::set_zero() {
  for (DenseLayer& layer : layers_) {
    layer.W.setZero();
    layer.b.setZero();
  }
}

Matrix Mlp::forward(const Matrix& x) const {
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Matrix z = layers_[i].W * h;
    z.colwise() += layers_[i].b.col(0);
    if (i + 1 < layers_.size() || relu_output_) z = z.cwiseMax(0.0);
    h = std::move(z);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x, Cache& cache) const {
  cache.inputs.resize(layers_.size());
  cache.pre.resize(layers_.size());
  Matrix h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cache.inputs[i] = h;
    Matrix& z = cache.pre[i];
    z.noalias() = layers_[i].W * h;
    z.colwise() += layers_[i].b.col(0);
    if (i + 1 < layers_.size() || relu_output_) {
      h = z.cwiseMax(0.0);
    } else {
      h = z;
    }
  }
  return h;
}

Matrix Mlp::backward(const Cache& cache, const Matrix& grad_out, Mlp& grads) const {
  Matrix g = grad_out;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    if (k + 1 < layers_.size() || relu_output_) {
      g = (cache.pre[k].array() > 0.0).select(g, 0.0);
    }
    grads.layers_[k].W.noalias() += g * cache.inputs[k].transpose();
    grads.layers_[k].b += g.rowwise().sum();
    Matrix next(layers_[k].W.cols(), g.cols());
    next.noalias() = layers_[k].W.transpose() * g;
    g = std::move(next);
  }
  return g;
}

void Mlp::collect(std::vector<Matrix*>& out) {
  for (DenseLayer& layer : layers_) {
    out.push_back(&layer.W);
    out.push_back(&layer.b);
  }
}

void Mlp::collect(std::vector<const Matrix*>& out) const {
  for (const DenseLayer& layer : layers_) {
    out.push_back(&layer.W);
    out.push_back(&layer.b);
  }
}

// ---------------------------------------------------------------------------

DuelingNet::DuelingNet(int obs_dim, int action_count, int hidden)
    : feature_({obs_dim, hidden, hidden}, true),
      value_({hidden, hidden, hidden, 1}, false),
      advantage_({hidden, hidden, hidden, action_count}, false) {}

void DuelingNet::init(Rng& rng) {
  feature_.init_kaiming(rng);
  value_.init_kaiming(rng);
  advantage_.init_kaiming(rng);
}

void DuelingNet::set_zero() {
  feature_.set_zero();
  value_.set_zero();
  advantage_.set_zero();
}

Matrix DuelingNet::aggregate(const Matrix& value, const Matrix& advantage) {
  if (value.rows() != 1 || value.cols() != advantage.cols()) {
    throw std::invalid_argument("dueling aggregation: head shapes disagree");
  }
  Matrix q = advantage;
  const Eigen::RowVectorXd shift = value.row(0) - advantage.colwise().mean();
  q.rowwise() += shift;
  return q;
}

Matrix DuelingNet::q_values(const Matrix& obs) const {
  if (obs.rows() != obs_dim()) {
    throw std::invalid_argument("observation dim " + std::to_string(obs.rows()) +
                                " does not match network input dim " + std::to_string(obs_dim()));
  }
  const Matrix f = feature_.forward(obs);
  return aggregate(value_.forward(f), advantage_.forward(f));
}

Matrix DuelingNet::q_values(const Matrix& obs, Cache& cache) const {
  if (obs.rows() != obs_dim()) {
    throw std::invalid_argument("observation dim " + std::to_string(obs.rows()) +
                                " does not match network input dim " + std::to_string(obs_dim()));
  }
  const Matrix f = feature_.forward(obs, cache.feature);
  return aggregate(value_.forward(f, cache.value), advantage_.forward(f, cache.advantage));
}

void DuelingNet::backward(const Cache& cache, const Matrix& grad_q, DuelingNet& grads) const {
  // dQ_a/dV = 1, dQ_a/dA_j = [a == j] - 1/n.
  const Matrix grad_v = grad_q.colwise().sum();
  Matrix grad_a = grad_q;
  const Eigen::RowVectorXd mean = grad_q.colwise().mean();
  grad_a.rowwise() -= mean;
  Matrix grad_f = value_.backward(cache.value, grad_v, grads.value_);
  grad_f += advantage_.backward(cache.advantage, grad_a, grads.advantage_);
  feature_.backward(cache.feature, grad_f, grads.feature_);
}

std::vector<Matrix*> DuelingNet::tensors() {
  std::vector<Matrix*> out;
  feature_.collect(out);
  value_.collect(out);
  advantage_.collect(out);
  return out;
}

std::vector<const Matrix*> DuelingNet::tensors() const {
  std::vector<const Matrix*> out;
  feature_.collect(out);
  value_.collect(out);
  advantage_.collect(out);
  return out;
}

std::size_t DuelingNet::parameter_count() const {
  std::size_t n = 0;
  for (const Matrix* m : tensors()) n += static_cast<std::size_t>(m->size());
  return n;
}

// ---------------------------------------------------------------------------

Adam::Adam(double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (!(lr > 0.0)) throw std::invalid_argument("Adam learning rate must be positive");
}

void Adam::step(DuelingNet& net, const DuelingNet& grads) {
  std::vector<Matrix*> params = net.tensors();
  std::vector<const Matrix*> g = grads.tensors();
  if (m_.empty()) {
    for (const Matrix* p : params) {
      m_.push_back(Matrix::Zero(p->rows(), p->cols()));
      v_.push_back(Matrix::Zero(p->rows(), p->cols()));
    }
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double step = lr_ * std::sqrt(c2) / c1;
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * *g[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g[i]->cwiseProduct(*g[i]);
    params[i]->array() -= step * m_[i].array() / (v_[i].array().sqrt() + eps_ * std::sqrt(c2));
  }
}

}  // namespace ayss::rl
