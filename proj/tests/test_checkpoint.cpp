#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ayss/checkpoint.hpp"
#include "ayss/error.hpp"

using namespace ayss;
using namespace ayss::rl;

namespace {

PolicyCheckpoint sample_checkpoint(Rng& rng, sim::Case c) {
  PolicyCheckpoint ckpt;
  ckpt.scenario_case = c;
  ckpt.step_index = 10000 * (1 + rng() % 30);
  ckpt.seed = rng();
  ckpt.config_hash = rng();
  ckpt.eval_mean_episode_reward = uniform(rng, -30.0, 30.0);
  ckpt.eval_crash_rate = uniform(rng, 0.0, 100.0);
  ckpt.net = DuelingNet(c == sim::Case::one_lane ? 3 : 4, sim::action_count(c), 8 + rng() % 9);
  ckpt.net.init(rng);
  return ckpt;
}

bool same_weights(const DuelingNet& a, const DuelingNet& b) {
  const auto ta = a.tensors();
  const auto tb = b.tensors();
  if (ta.size() != tb.size()) return false;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (ta[i]->rows() != tb[i]->rows() || ta[i]->cols() != tb[i]->cols() || *ta[i] != *tb[i]) {
      return false;
    }
  }
  return true;
}

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "ayss_test_checkpoint";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("encode/decode round trip is exact") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const sim::Case c = trial % 2 ? sim::Case::two_lane : sim::Case::one_lane;
      const PolicyCheckpoint a = sample_checkpoint(rng, c);
      const PolicyCheckpoint b = decode_checkpoint(encode_checkpoint(a));
      CHECK(b.scenario_case == a.scenario_case);
      CHECK(b.step_index == a.step_index);
      CHECK(b.seed == a.seed);
      CHECK(b.config_hash == a.config_hash);
      CHECK(b.eval_mean_episode_reward == a.eval_mean_episode_reward);
      CHECK(b.eval_crash_rate == a.eval_crash_rate);
      CHECK(same_weights(a.net, b.net));
      CHECK(encode_checkpoint(b) == encode_checkpoint(a));
    }
  }

  TEST_CASE("file round trip") {
    Rng rng(4);
    const PolicyCheckpoint a = sample_checkpoint(rng, sim::Case::one_lane);
    const auto path = scratch_dir() / "roundtrip.bin";
    save_checkpoint(a, path);
    const PolicyCheckpoint b = load_checkpoint(path);
    CHECK(same_weights(a.net, b.net));
    CHECK(b.eval_mean_episode_reward == a.eval_mean_episode_reward);
  }

  TEST_CASE("corrupt inputs are rejected") {
    Rng rng(5);
    const auto bytes = encode_checkpoint(sample_checkpoint(rng, sim::Case::one_lane));

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS(decode_checkpoint(bad_magic));

    auto bad_version = bytes;
    bad_version[8] = 99;
    CHECK_THROWS_WITH(decode_checkpoint(bad_version), doctest::Contains("version"));

    auto truncated = bytes;
    truncated.resize(bytes.size() - 1);
    CHECK_THROWS_WITH(decode_checkpoint(truncated), doctest::Contains("truncated"));

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_WITH(decode_checkpoint(trailing), doctest::Contains("trailing"));

    CHECK_THROWS(decode_checkpoint({}));
  }

  TEST_CASE("load errors name the file") {
    const auto missing = scratch_dir() / "does_not_exist.bin";
    std::filesystem::remove(missing);
    CHECK_THROWS_WITH_AS(load_checkpoint(missing), doctest::Contains("does_not_exist.bin"),
                         RuntimeError);

    const auto garbage = scratch_dir() / "garbage.bin";
    std::ofstream(garbage, std::ios::binary) << "not a checkpoint";
    CHECK_THROWS_WITH_AS(load_checkpoint(garbage), doctest::Contains("garbage.bin"), RuntimeError);
  }
}
