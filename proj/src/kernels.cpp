#include "ayss/kernels.hpp"

#include <omp.h>

#include <algorithm>

#include "ayss/dqn.hpp"

namespace ayss::kernels {

namespace {

void actions_for_chunk(const rl::DuelingNet& net, std::span<const sim::Observation> obs,
                       std::size_t begin, std::vector<int>& out) {
  const std::size_t end = std::min(begin + kActionChunk, obs.size());
  const rl::Matrix q = net.q_values(rl::feature_batch(obs.subspan(begin, end - begin)));
  for (std::size_t i = begin; i < end; ++i) {
    const auto col = static_cast<Eigen::Index>(i - begin);
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < q.rows(); ++a) {
      if (q(a, col) > q(best, col)) best = a;
    }
    out[i] = static_cast<int>(best);
  }
}

sim::EpisodeSummary greedy_episode(const sim::Scene& scene, const rl::DuelingNet& net,
                                   const sim::InitialCondition& start) {
  const sim::PovPolicy policy = [&net](const sim::Observation& o) {
    return rl::greedy_action(net, o);
  };
  return sim::run_episode(scene, start, policy).summary;
}

}  // namespace

namespace serial {

std::vector<int> greedy_actions(const rl::DuelingNet& net, std::span<const sim::Observation> obs) {
  std::vector<int> out(obs.size());
  for (std::size_t begin = 0; begin < obs.size(); begin += kActionChunk) {
    actions_for_chunk(net, obs, begin, out);
  }
  return out;
}

std::vector<sim::EpisodeSummary> rollout_greedy(const sim::Scene& scene, const rl::DuelingNet& net,
                                                std::span<const sim::InitialCondition> starts) {
  std::vector<sim::EpisodeSummary> out;
  out.reserve(starts.size());
  for (const sim::InitialCondition& ic : starts) out.push_back(greedy_episode(scene, net, ic));
  return out;
}

}  // namespace serial

namespace omp {

std::vector<int> greedy_actions(const rl::DuelingNet& net, std::span<const sim::Observation> obs) {
  std::vector<int> out(obs.size());
  const auto chunks = static_cast<long>((obs.size() + kActionChunk - 1) / kActionChunk);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < chunks; ++c) {
    actions_for_chunk(net, obs, static_cast<std::size_t>(c) * kActionChunk, out);
  }
  return out;
}

std::vector<sim::EpisodeSummary> rollout_greedy(const sim::Scene& scene, const rl::DuelingNet& net,
                                                std::span<const sim::InitialCondition> starts) {
  std::vector<sim::EpisodeSummary> out(starts.size());
  const auto n = static_cast<long>(starts.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = greedy_episode(scene, net, starts[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace omp

int thread_count() { return omp_get_max_threads(); }

}  // namespace ayss::kernels
