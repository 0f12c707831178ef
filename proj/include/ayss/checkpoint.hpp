#pragma once

// PolicyCheckpoint: versioned binary snapshot of a POV Q-network plus the
// score it earned when evaluated as an SPCP candidate.
//
// Layout (all integers and floats little-endian):
//   char[8]  magic "AYSSPOV\0"
//   u32      format version (1)
//   u32      case (0 = one_lane, 1 = two_lane)
//   u32      observation dim
//   u32      action count
//   u32      number of sub-networks (3: feature, value, advantage)
//   per sub-network: u32 relu_output, u32 n_dims, u32 dims[n_dims]
//   u64      step index
//   u64      seed
//   u64      config hash
//   f64      mean evaluation episode reward
//   f64      evaluation crash rate [%]
//   f64[]    every weight matrix then bias vector, row-major, in network order

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ayss/nn.hpp"
#include "ayss/sim.hpp"

namespace ayss::rl {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct PolicyCheckpoint {
  sim::Case scenario_case = sim::Case::one_lane;
  std::uint64_t step_index = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  double eval_mean_episode_reward = 0.0;
  double eval_crash_rate = 0.0;
  DuelingNet net;
};

std::vector<std::uint8_t> encode_checkpoint(const PolicyCheckpoint& ckpt);
PolicyCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path);
/// Throws RuntimeError naming the file when it cannot be read or parsed.
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ayss::rl
