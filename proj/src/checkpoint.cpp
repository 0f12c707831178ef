#include "ayss/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "ayss/error.hpp"

namespace ayss::rl {

namespace {

constexpr char kMagic[8] = {'A', 'Y', 'S', 'S', 'P', 'O', 'V', '\0'};

class Writer {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out.insert(out.end(), b, b + n);
  }
  template <typename T>
  void le(T value) {
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
    raw(bytes, sizeof(T));
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

  std::vector<std::uint8_t> out;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& b) : bytes(b) {}

  void raw(void* p, std::size_t n) {
    if (pos + n > bytes.size()) throw std::runtime_error("truncated checkpoint");
    std::memcpy(p, bytes.data() + pos, n);
    pos += n;
  }
  template <typename T>
  T le() {
    std::uint8_t b[sizeof(T)];
    raw(b, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T value;
    std::memcpy(&value, b, sizeof(T));
    return value;
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

  const std::vector<std::uint8_t>& bytes;
  std::size_t pos = 0;
};

void write_layout(Writer& w, const Mlp& net) {
  w.u32(net.relu_output() ? 1 : 0);
  w.u32(static_cast<std::uint32_t>(net.dims().size()));
  for (int d : net.dims()) w.u32(static_cast<std::uint32_t>(d));
}

Mlp read_layout(Reader& r) {
  const bool relu = r.u32() != 0;
  const std::uint32_t n = r.u32();
  if (n < 2 || n > 16) throw std::runtime_error("implausible layer count");
  std::vector<int> dims(n);
  for (auto& d : dims) {
    d = static_cast<int>(r.u32());
    if (d <= 0 || d > 1 << 16) throw std::runtime_error("implausible layer width");
  }
  return Mlp(dims, relu);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const PolicyCheckpoint& ckpt) {
  Writer w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kCheckpointVersion);
  w.u32(ckpt.scenario_case == sim::Case::one_lane ? 0 : 1);
  w.u32(static_cast<std::uint32_t>(ckpt.net.obs_dim()));
  w.u32(static_cast<std::uint32_t>(ckpt.net.action_count()));
  w.u32(3);
  write_layout(w, ckpt.net.feature());
  write_layout(w, ckpt.net.value());
  write_layout(w, ckpt.net.advantage());
  w.u64(ckpt.step_index);
  w.u64(ckpt.seed);
  w.u64(ckpt.config_hash);
  w.f64(ckpt.eval_mean_episode_reward);
  w.f64(ckpt.eval_crash_rate);
  for (const Matrix* m : ckpt.net.tensors()) {
    for (Eigen::Index r = 0; r < m->rows(); ++r) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) w.f64((*m)(r, c));
    }
  }
  return std::move(w.out);
}

PolicyCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw std::runtime_error("bad magic");
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  PolicyCheckpoint ckpt;
  const std::uint32_t case_id = r.u32();
  if (case_id > 1) throw std::runtime_error("unknown case id");
  ckpt.scenario_case = case_id == 0 ? sim::Case::one_lane : sim::Case::two_lane;
  const auto obs_dim = static_cast<int>(r.u32());
  const auto actions = static_cast<int>(r.u32());
  if (r.u32() != 3) throw std::runtime_error("expected three sub-networks");
  Mlp feature = read_layout(r);
  Mlp value = read_layout(r);
  Mlp advantage = read_layout(r);
  if (feature.dims().front() != obs_dim || advantage.dims().back() != actions ||
      value.dims().back() != 1 || feature.dims().back() != value.dims().front() ||
      feature.dims().back() != advantage.dims().front()) {
    throw std::runtime_error("inconsistent network layout");
  }
  ckpt.net.feature() = std::move(feature);
  ckpt.net.value() = std::move(value);
  ckpt.net.advantage() = std::move(advantage);
  ckpt.step_index = r.u64();
  ckpt.seed = r.u64();
  ckpt.config_hash = r.u64();
  ckpt.eval_mean_episode_reward = r.f64();
  ckpt.eval_crash_rate = r.f64();
  for (Matrix* m : ckpt.net.tensors()) {
    for (Eigen::Index row = 0; row < m->rows(); ++row) {
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(row, c) = r.f64();
    }
  }
  if (r.pos != bytes.size()) throw std::runtime_error("trailing bytes after weights");
  return ckpt;
}

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeError("failed writing checkpoint " + path.string());
}

PolicyCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw RuntimeError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const std::exception& e) {
    throw RuntimeError("unreadable checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace ayss::rl
