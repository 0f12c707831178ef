#include "ayss/replay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ayss::rl {

namespace {

std::size_t pow2_at_least(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

SumTree::SumTree(std::size_t capacity)
    : capacity_(capacity), base_(pow2_at_least(std::max<std::size_t>(capacity, 1))),
      nodes_(2 * base_, 0.0) {
  if (capacity == 0) throw std::invalid_argument("SumTree capacity must be positive");
}

void SumTree::set(std::size_t leaf, double value) {
  if (leaf >= capacity_) throw std::out_of_range("SumTree leaf out of range");
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw std::invalid_argument("SumTree values must be finite and non-negative");
  }
  std::size_t i = base_ + leaf;
  nodes_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = nodes_[2 * i] + nodes_[2 * i + 1];
}

std::size_t SumTree::find(double mass) const {
  std::size_t i = 1;
  while (i < base_) {
    const double left = nodes_[2 * i];
    if (mass < left) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  std::size_t leaf = i - base_;
  // Rounding can walk past the last populated leaf; step back to a live one.
  while (leaf > 0 && (leaf >= capacity_ || nodes_[base_ + leaf] == 0.0)) --leaf;
  return leaf;
}

MinTree::MinTree(std::size_t capacity)
    : base_(pow2_at_least(std::max<std::size_t>(capacity, 1))),
      nodes_(2 * base_, std::numeric_limits<double>::infinity()) {}

void MinTree::set(std::size_t leaf, double value) {
  std::size_t i = base_ + leaf;
  nodes_[i] = value;
  for (i >>= 1; i >= 1; i >>= 1) nodes_[i] = std::min(nodes_[2 * i], nodes_[2 * i + 1]);
}

// ---------------------------------------------------------------------------

PrioritizedBuffer::PrioritizedBuffer(std::size_t capacity, double alpha, double epsilon_p)
    : capacity_(capacity), alpha_(alpha), epsilon_p_(epsilon_p), sum_(capacity), min_(capacity) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("PER alpha must be non-negative");
  if (!(epsilon_p > 0.0)) throw std::invalid_argument("PER epsilon_p must be positive");
  storage_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void PrioritizedBuffer::set_priority(std::size_t i, double priority) {
  priorities_[i] = priority;
  const double scaled = std::pow(priority, alpha_);
  sum_.set(i, scaled);
  min_.set(i, scaled);
}

void PrioritizedBuffer::add(const sim::Transition& t) {
  if (storage_.size() < capacity_) {
    storage_.push_back(t);
    priorities_.push_back(0.0);
  } else {
    storage_[next_] = t;
  }
  set_priority(next_, max_priority_);
  next_ = (next_ + 1) % capacity_;
}

PrioritizedBuffer::Batch PrioritizedBuffer::sample(std::size_t n, double beta, Rng& rng) const {
  if (storage_.empty()) throw std::logic_error("cannot sample from an empty replay buffer");
  Batch batch;
  batch.indices.reserve(n);
  batch.weights.reserve(n);
  const double total = sum_.total();
  const double p_min = min_.min() / total;
  const double n_items = static_cast<double>(storage_.size());
  const double w_max = std::pow(n_items * p_min, -beta);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = sum_.find(uniform01(rng) * total);
    batch.indices.push_back(i);
    const double p = sum_.get(i) / total;
    batch.weights.push_back(std::pow(n_items * p, -beta) / w_max);
  }
  return batch;
}

void PrioritizedBuffer::update_priorities(std::span<const std::size_t> indices,
                                          std::span<const double> td_errors) {
  if (indices.size() != td_errors.size()) {
    throw std::invalid_argument("update_priorities: size mismatch");
  }
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (!std::isfinite(td_errors[k])) throw std::invalid_argument("non-finite TD error");
    const double p = std::abs(td_errors[k]) + epsilon_p_;
    set_priority(indices[k], p);
    max_priority_ = std::max(max_priority_, p);
  }
}

double PrioritizedBuffer::probability(std::size_t i) const {
  return sum_.get(i) / sum_.total();
}

double PrioritizedBuffer::priority(std::size_t i) const { return priorities_.at(i); }

}  // namespace ayss::rl
