#pragma once

// Prioritized experience replay backed by sum/min segment trees.

#include <cstddef>
#include <span>
#include <vector>

#include "ayss/rng.hpp"
#include "ayss/sim.hpp"

namespace ayss::rl {

/// Complete binary tree over a power-of-two number of leaves; node i has
/// children 2i and 2i+1, the root is node 1.
class SumTree {
 public:
  explicit SumTree(std::size_t capacity);

  void set(std::size_t leaf, double value);
  double get(std::size_t leaf) const { return nodes_[base_ + leaf]; }
  double total() const { return nodes_[1]; }
  /// Smallest leaf whose prefix sum exceeds mass; mass in [0, total()).
  std::size_t find(double mass) const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::size_t base_;
  std::vector<double> nodes_;
};

class MinTree {
 public:
  explicit MinTree(std::size_t capacity);

  void set(std::size_t leaf, double value);
  double min() const { return nodes_[1]; }

 private:
  std::size_t base_;
  std::vector<double> nodes_;
};

class PrioritizedBuffer {
 public:
  PrioritizedBuffer(std::size_t capacity, double alpha, double epsilon_p);

  /// New transitions enter with the largest priority seen so far.
  void add(const sim::Transition& t);

  struct Batch {
    std::vector<std::size_t> indices;
    std::vector<double> weights;  // importance weights, max over the buffer = 1
  };

  /// Draws n indices independently with P(i) = p_i^alpha / sum_j p_j^alpha.
  Batch sample(std::size_t n, double beta, Rng& rng) const;

  /// Priority becomes |td_error| + epsilon_p.
  void update_priorities(std::span<const std::size_t> indices, std::span<const double> td_errors);

  double probability(std::size_t i) const;
  double priority(std::size_t i) const;
  const sim::Transition& at(std::size_t i) const { return storage_.at(i); }
  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  double alpha() const { return alpha_; }
  const SumTree& sum_tree() const { return sum_; }

 private:
  void set_priority(std::size_t i, double priority);

  std::size_t capacity_;
  double alpha_;
  double epsilon_p_;
  std::vector<sim::Transition> storage_;
  std::vector<double> priorities_;
  std::size_t next_ = 0;
  double max_priority_ = 1.0;
  SumTree sum_;
  MinTree min_;
};

}  // namespace ayss::rl
