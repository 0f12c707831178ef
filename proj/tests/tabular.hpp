#pragma once

// Dueling networks wired by hand so that Q(s, a) equals a given table for
// three one-hot states. Used to check target computations exactly.

#include <array>

#include "ayss/dqn.hpp"

namespace tabular {

using Table = std::array<std::array<double, 2>, 3>;

/// State i is the observation whose normalized feature vector is e_i.
inline ayss::sim::Observation state(int i) {
  ayss::sim::Observation o;
  o.pov_speed = i == 0 ? 40.0 : 0.0;
  o.vut_speed = i == 1 ? 40.0 : 0.0;
  o.headway = i == 2 ? 100.0 : 0.0;
  return o;
}

/// Identity feature and hidden layers; the value head outputs the row mean
/// and the advantage head outputs the row itself, so Q reproduces the table
/// whenever the row sums are exact in floating point.
inline ayss::rl::DuelingNet net_for(const Table& q) {
  constexpr int kHidden = 4;
  ayss::rl::DuelingNet net(3, 2, kHidden);
  net.set_zero();
  auto identity = [](ayss::rl::Mlp& mlp, int layers) {
    for (int k = 0; k < layers; ++k) {
      auto& W = mlp.layers()[k].W;
      for (int i = 0; i < std::min(W.rows(), W.cols()); ++i) W(i, i) = 1.0;
    }
  };
  identity(net.feature(), 2);
  identity(net.value(), 2);
  identity(net.advantage(), 2);
  auto& Wv = net.value().layers()[2].W;
  auto& Wa = net.advantage().layers()[2].W;
  for (int s = 0; s < 3; ++s) {
    Wv(0, s) = 0.5 * (q[s][0] + q[s][1]);
    Wa(0, s) = q[s][0];
    Wa(1, s) = q[s][1];
  }
  return net;
}

}  // namespace tabular
