#pragma once

// Data-parallel kernels. Each kernel has a serial reference implementation
// and an OpenMP version that must produce bit-identical results; the serial
// path is kept for tests and for the benchmark comparison.

#include <span>
#include <vector>

#include "ayss/nn.hpp"
#include "ayss/sim.hpp"

namespace ayss::kernels {

/// Observations per batched forward pass. Both variants use the same
/// partition so their floating-point results agree exactly.
inline constexpr std::size_t kActionChunk = 512;

namespace serial {

std::vector<int> greedy_actions(const rl::DuelingNet& net, std::span<const sim::Observation> obs);

std::vector<sim::EpisodeSummary> rollout_greedy(const sim::Scene& scene, const rl::DuelingNet& net,
                                                std::span<const sim::InitialCondition> starts);

}  // namespace serial

namespace omp {

std::vector<int> greedy_actions(const rl::DuelingNet& net, std::span<const sim::Observation> obs);

std::vector<sim::EpisodeSummary> rollout_greedy(const sim::Scene& scene, const rl::DuelingNet& net,
                                                std::span<const sim::InitialCondition> starts);

}  // namespace omp

/// Number of OpenMP threads the parallel kernels will use.
int thread_count();

}  // namespace ayss::kernels
