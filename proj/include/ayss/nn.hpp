#pragma once

// Fully connected networks with hand-written backpropagation, the dueling
// Q-network built from three of them, and an Adam optimizer.

#include <Eigen/Core>
#include <vector>

#include "ayss/rng.hpp"

namespace ayss::rl {

/// Column-major batch: one sample per column.
using Matrix = Eigen::MatrixXd;

struct DenseLayer {
  Matrix W;  // out x in
  Matrix b;  // out x 1
};

/// Dense layers with ReLU between them; the output layer is linear unless
/// relu_output is set (used for the shared feature extractor).
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> dims, bool relu_output);

  struct Cache {
    std::vector<Matrix> inputs;  // input of each layer
    std::vector<Matrix> pre;     // pre-activation of each layer
  };

  void init_kaiming(Rng& rng);
  void set_zero();

  Matrix forward(const Matrix& x) const;
  Matrix forward(const Matrix& x, Cache& cache) const;
  /// Accumulates parameter gradients into grads (same shape as *this) and
  /// returns the gradient with respect to the input.
  Matrix backward(const Cache& cache, const Matrix& grad_out, Mlp& grads) const;

  const std::vector<int>& dims() const { return dims_; }
  bool relu_output() const { return relu_output_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  void collect(std::vector<Matrix*>& out);
  void collect(std::vector<const Matrix*>& out) const;

 private:
  std::vector<int> dims_;
  bool relu_output_ = false;
  std::vector<DenseLayer> layers_;
};

/// Q(s, a) = V(f(s)) + A(f(s), a) - mean_a' A(f(s), a').
class DuelingNet {
 public:
  DuelingNet() = default;
  DuelingNet(int obs_dim, int action_count, int hidden = 256);

  struct Cache {
    Mlp::Cache feature, value, advantage;
  };

  void init(Rng& rng);
  void set_zero();

  /// actions x batch
  Matrix q_values(const Matrix& obs) const;
  Matrix q_values(const Matrix& obs, Cache& cache) const;
  void backward(const Cache& cache, const Matrix& grad_q, DuelingNet& grads) const;

  /// Combines the two heads; exposed for tests of the aggregation rule.
  static Matrix aggregate(const Matrix& value, const Matrix& advantage);

  int obs_dim() const { return feature_.dims().front(); }
  int action_count() const { return advantage_.dims().back(); }

  Mlp& feature() { return feature_; }
  Mlp& value() { return value_; }
  Mlp& advantage() { return advantage_; }
  const Mlp& feature() const { return feature_; }
  const Mlp& value() const { return value_; }
  const Mlp& advantage() const { return advantage_; }

  /// Every weight and bias tensor in a fixed order (feature, value, advantage).
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t parameter_count() const;

 private:
  Mlp feature_, value_, advantage_;
};

class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(DuelingNet& net, const DuelingNet& grads);

  long steps() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace ayss::rl
