#include "ayss/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "ayss/error.hpp"

namespace ayss::config {

using nlohmann::json;

namespace {

/// Reads one JSON object, remembering which keys were consumed so that
/// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    const json* v = take(key);
    if (!v) return;
    out = convert<T>(*v, where(key));
  }

  void interval(const char* key, sim::Interval& out) {
    const json* v = take(key);
    if (!v) return;
    if (!v->is_array() || v->size() != 2) throw ConfigError(where(key) + ": expected [low, high]");
    out.low = convert<double>((*v)[0], where(key));
    out.high = convert<double>((*v)[1], where(key));
  }

  void shape(const char* key, ssm::RewardShape& out) {
    const json* v = take(key);
    if (!v) return;
    Section s(*v, where(key));
    s.get("peak_h", out.peak_h);
    s.get("zero_h", out.zero_h);
    s.finish();
  }

  void odd(const char* key, sim::OddBounds& out) {
    const json* v = take(key);
    if (!v) return;
    Section s(*v, where(key));
    s.interval("vut_speed", out.vut_speed);
    s.interval("pov_speed", out.pov_speed);
    s.interval("gap", out.gap);
    s.get("reject_unavoidable", out.reject_unavoidable);
    s.finish();
  }

  const json* take(const char* key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown config key '" + where(key.c_str()) + "'");
    }
  }

  std::string where(const char* key = nullptr) const {
    std::string p = path_.empty() ? std::string("<root>") : path_;
    if (key) p = path_.empty() ? std::string(key) : path_ + "." + key;
    return p;
  }

 private:
  template <typename T>
  static T convert(const json& v, const std::string& path) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(path + ": expected a boolean");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(path + ": expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
      if (std::is_unsigned_v<T> && !v.is_number_unsigned()) {
        throw ConfigError(path + ": expected a non-negative integer");
      }
      return v.get<T>();
    } else {
      if (!v.is_number()) throw ConfigError(path + ": expected a number");
      return v.get<T>();
    }
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

json interval_json(const sim::Interval& iv) { return json::array({iv.low, iv.high}); }

json odd_json(const sim::OddBounds& odd) {
  return {{"vut_speed", interval_json(odd.vut_speed)},
          {"pov_speed", interval_json(odd.pov_speed)},
          {"gap", interval_json(odd.gap)},
          {"reject_unavoidable", odd.reject_unavoidable}};
}

json shape_json(const ssm::RewardShape& s) { return {{"peak_h", s.peak_h}, {"zero_h", s.zero_h}}; }

json idm_json(const vut::IDMParams& p) {
  return {{"v0", p.v0}, {"s0", p.s0}, {"T", p.T}, {"a_max", p.a_max}, {"b", p.b}, {"delta", p.delta}};
}

}  // namespace

// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (vuts.empty()) throw ConfigError("vuts must list at least one VUT");
  if (seeds.empty()) throw ConfigError("seeds must list at least one seed");
  std::set<std::string> ids;
  for (const auto& v : vuts) {
    if (v.id.empty()) throw ConfigError("vuts: empty id");
    if (!ids.insert(v.id).second) throw ConfigError("vuts: duplicate id '" + v.id + "'");
    v.params.validate();
  }
  std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) throw ConfigError("seeds: duplicate seed");
  sim.validate();
  reward.validate();
  dqn.validate();
  train.validate();
  ayss.filter.validate();
  if (ayss.n_samples <= 0) throw ConfigError("ayss.n_samples must be positive");
  if (!(ayss.bin_width > 0.0)) throw ConfigError("ayss.bin_width must be positive");
  if (ayss.n_episodes <= 0) throw ConfigError("ayss.n_episodes must be positive");
  if (!(ayss.compare.majority > 0.0 && ayss.compare.majority <= 1.0)) {
    throw ConfigError("ayss.majority must lie in (0, 1]");
  }
  if (!(ayss.compare.headway_low < ayss.compare.headway_high)) {
    throw ConfigError("ayss.headway_low must be below ayss.headway_high");
  }
  if (ayss.filter.scenario_case != scenario_case) throw ConfigError("ayss filter case mismatch");
}

const vut::VutSpec& ExperimentConfig::vut(const std::string& id) const {
  for (const auto& v : vuts) {
    if (v.id == id) return v;
  }
  throw ConfigError("unknown VUT id '" + id + "'");
}

train::TrainRunConfig ExperimentConfig::run_config(const std::string& vut_id,
                                                   std::uint64_t seed) const {
  train::TrainRunConfig run = train;
  run.scenario_case = scenario_case;
  run.vut_id = vut(vut_id).id;
  run.seed = seed;
  return run;
}

ExperimentConfig default_config(sim::Case c) {
  ExperimentConfig cfg;
  cfg.scenario_case = c;
  cfg.vuts = {vut::preset("pi1"), vut::preset("pi2")};
  cfg.seeds = {0, 1, 2};
  cfg.reward.scenario_case = c;
  cfg.train.scenario_case = c;
  cfg.ayss.filter.scenario_case = c;
  if (c == sim::Case::one_lane) {
    cfg.ayss.compare.headway_low = 0.5;
    cfg.ayss.compare.headway_high = 5.0;
    cfg.ayss.compare.min_records = 30;
  }
  return cfg;
}

ExperimentConfig from_json(const json& doc) {
  Section root(doc, "");
  int version = 0;
  root.get("schema_version", version);
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version must be " + std::to_string(kSchemaVersion) + " (got " +
                      std::to_string(version) + ")");
  }
  std::string case_name = "one_lane";
  root.get("case", case_name);
  sim::Case c;
  try {
    c = sim::case_from_string(case_name);
  } catch (const std::exception&) {
    throw ConfigError("case: expected one_lane or two_lane, got '" + case_name + "'");
  }
  ExperimentConfig cfg = default_config(c);

  if (const json* vuts = root.take("vuts")) {
    if (!vuts->is_array()) throw ConfigError("vuts: expected an array");
    cfg.vuts.clear();
    for (std::size_t i = 0; i < vuts->size(); ++i) {
      Section v((*vuts)[i], "vuts[" + std::to_string(i) + "]");
      vut::VutSpec spec;
      v.get("id", spec.id);
      const json* idm = v.take("idm");
      if (idm) {
        Section p(*idm, v.where("idm"));
        p.get("v0", spec.params.v0);
        p.get("s0", spec.params.s0);
        p.get("T", spec.params.T);
        p.get("a_max", spec.params.a_max);
        p.get("b", spec.params.b);
        p.get("delta", spec.params.delta);
        p.finish();
      } else if (vut::is_preset(spec.id)) {
        spec.params = vut::preset(spec.id).params;
      } else {
        throw ConfigError("unknown VUT id '" + spec.id + "' (use pi1, pi2, or give idm parameters)");
      }
      v.finish();
      cfg.vuts.push_back(spec);
    }
  }
  if (const json* seeds = root.take("seeds")) {
    if (!seeds->is_array()) throw ConfigError("seeds: expected an array");
    cfg.seeds.clear();
    for (const auto& s : *seeds) {
      if (!s.is_number_unsigned()) throw ConfigError("seeds: expected non-negative integers");
      cfg.seeds.push_back(s.get<std::uint64_t>());
    }
  }
  if (const json* node = root.take("sim")) {
    Section s(*node, "sim");
    auto& m = cfg.sim;
    s.get("dt", m.dt);
    s.get("episode_len", m.episode_len);
    s.get("substeps", m.substeps);
    s.interval("accel_bounds", m.accel_bounds);
    s.get("speed_cap", m.speed_cap);
    s.get("kp_speed", m.kp_speed);
    s.get("k_lat", m.k_lat);
    s.get("k_head", m.k_head);
    s.get("max_heading", m.max_heading);
    s.get("max_steer", m.max_steer);
    s.get("lane_change_duration_nominal", m.lane_change_duration_nominal);
    s.get("vehicle_length", m.vehicle_length);
    s.get("vehicle_width", m.vehicle_width);
    s.odd("one_lane_odd", m.one_lane_odd);
    s.odd("two_lane_odd", m.two_lane_odd);
    s.get("disturbance_amplitude", m.disturbance_amplitude);
    s.finish();
  }
  if (const json* node = root.take("reward")) {
    Section s(*node, "reward");
    s.get("alpha_A", cfg.reward.alpha_A);
    s.get("alpha_C", cfg.reward.alpha_C);
    s.shape("same_lane", cfg.reward.same_lane);
    s.shape("lane_change", cfg.reward.lane_change);
    s.finish();
  }
  if (const json* node = root.take("dqn")) {
    Section s(*node, "dqn");
    auto& h = cfg.dqn;
    s.get("gamma", h.gamma);
    s.get("learning_rate", h.learning_rate);
    s.get("hidden", h.hidden);
    s.get("batch_size", h.batch_size);
    s.get("buffer_capacity", h.buffer_capacity);
    s.get("target_update_period", h.target_update_period);
    s.get("epsilon_start", h.epsilon_start);
    s.get("epsilon_end", h.epsilon_end);
    s.get("epsilon_decay_steps", h.epsilon_decay_steps);
    s.get("alpha", h.alpha);
    s.get("beta0", h.beta0);
    s.get("beta_anneal_steps", h.beta_anneal_steps);
    s.get("epsilon_p", h.epsilon_p);
    s.get("update_per_step", h.update_per_step);
    s.get("warmup_steps", h.warmup_steps);
    s.finish();
  }
  if (const json* node = root.take("train")) {
    Section s(*node, "train");
    s.get("total_env_steps", cfg.train.total_env_steps);
    s.get("checkpoint_period", cfg.train.checkpoint_period);
    s.get("eval_scenarios", cfg.train.eval_scenarios);
    s.get("d", cfg.train.d);
    s.finish();
  }
  if (const json* node = root.take("ayss")) {
    Section s(*node, "ayss");
    auto& a = cfg.ayss;
    s.get("max_headway", a.filter.max_headway);
    s.get("min_ttc", a.filter.min_ttc);
    s.get("require_lane_change", a.filter.require_lane_change);
    s.get("require_rear_ahead", a.filter.require_rear_ahead);
    s.get("n_samples", a.n_samples);
    s.get("bin_width", a.bin_width);
    s.get("n_episodes", a.n_episodes);
    s.get("majority", a.compare.majority);
    s.get("min_records", a.compare.min_records);
    s.get("headway_low", a.compare.headway_low);
    s.get("headway_high", a.compare.headway_high);
    s.finish();
  }
  root.get("output_dir", cfg.output_dir);
  root.finish();
  cfg.validate();
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json vuts = json::array();
  for (const auto& v : cfg.vuts) vuts.push_back({{"id", v.id}, {"idm", idm_json(v.params)}});
  const auto& m = cfg.sim;
  const auto& h = cfg.dqn;
  const auto& a = cfg.ayss;
  return {
      {"schema_version", kSchemaVersion},
      {"case", std::string(sim::to_string(cfg.scenario_case))},
      {"vuts", vuts},
      {"seeds", cfg.seeds},
      {"sim",
       {{"dt", m.dt},
        {"episode_len", m.episode_len},
        {"substeps", m.substeps},
        {"accel_bounds", interval_json(m.accel_bounds)},
        {"speed_cap", m.speed_cap},
        {"kp_speed", m.kp_speed},
        {"k_lat", m.k_lat},
        {"k_head", m.k_head},
        {"max_heading", m.max_heading},
        {"max_steer", m.max_steer},
        {"lane_change_duration_nominal", m.lane_change_duration_nominal},
        {"vehicle_length", m.vehicle_length},
        {"vehicle_width", m.vehicle_width},
        {"one_lane_odd", odd_json(m.one_lane_odd)},
        {"two_lane_odd", odd_json(m.two_lane_odd)},
        {"disturbance_amplitude", m.disturbance_amplitude}}},
      {"reward",
       {{"alpha_A", cfg.reward.alpha_A},
        {"alpha_C", cfg.reward.alpha_C},
        {"same_lane", shape_json(cfg.reward.same_lane)},
        {"lane_change", shape_json(cfg.reward.lane_change)}}},
      {"dqn",
       {{"gamma", h.gamma},
        {"learning_rate", h.learning_rate},
        {"hidden", h.hidden},
        {"batch_size", h.batch_size},
        {"buffer_capacity", h.buffer_capacity},
        {"target_update_period", h.target_update_period},
        {"epsilon_start", h.epsilon_start},
        {"epsilon_end", h.epsilon_end},
        {"epsilon_decay_steps", h.epsilon_decay_steps},
        {"alpha", h.alpha},
        {"beta0", h.beta0},
        {"beta_anneal_steps", h.beta_anneal_steps},
        {"epsilon_p", h.epsilon_p},
        {"update_per_step", h.update_per_step},
        {"warmup_steps", h.warmup_steps}}},
      {"train",
       {{"total_env_steps", cfg.train.total_env_steps},
        {"checkpoint_period", cfg.train.checkpoint_period},
        {"eval_scenarios", cfg.train.eval_scenarios},
        {"d", cfg.train.d}}},
      {"ayss",
       {{"max_headway", a.filter.max_headway},
        {"min_ttc", a.filter.min_ttc},
        {"require_lane_change", a.filter.require_lane_change},
        {"require_rear_ahead", a.filter.require_rear_ahead},
        {"n_samples", a.n_samples},
        {"bin_width", a.bin_width},
        {"n_episodes", a.n_episodes},
        {"majority", a.compare.majority},
        {"min_records", a.compare.min_records},
        {"headway_low", a.compare.headway_low},
        {"headway_high", a.compare.headway_high}}},
      {"output_dir", cfg.output_dir},
  };
}

ExperimentConfig load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void save(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << to_json(cfg).dump(2) << '\n';
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  json doc = to_json(cfg);
  doc.erase("output_dir");
  const std::string canonical = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace ayss::config
