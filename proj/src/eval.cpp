#include "ayss/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "ayss/error.hpp"
#include "ayss/kernels.hpp"
#include "ayss/ssm.hpp"

namespace ayss::eval {

void AyssFilterConfig::validate() const {
  if (!(max_headway > 0.0) || !(min_ttc > 0.0)) {
    throw ConfigError("filter thresholds must be positive");
  }
}

bool passes_observation_filter(const sim::Observation& obs, const AyssFilterConfig& filter) {
  if (filter.scenario_case == sim::Case::one_lane) {
    if (!(obs.headway > 0.0) || obs.headway > filter.max_headway) return false;
    return ssm::ttc_1d(obs.headway, obs.vut_speed, obs.pov_speed) >= filter.min_ttc;
  }
  // Cut-ins start from the adjacent lane.
  if (obs.same_lane != 0.0) return false;
  if (filter.require_rear_ahead && !(obs.headway > 0.0)) return false;
  return true;
}

bool passes_filter(const AggressivenessRecord& rec, const AyssFilterConfig& filter) {
  if (!passes_observation_filter(rec.obs, filter)) return false;
  if (filter.scenario_case == sim::Case::one_lane) {
    return rec.derived_accel.has_value() && !rec.delta_v_bar.has_value();
  }
  if (filter.require_lane_change && rec.action != sim::kLaneChangeAction) return false;
  return rec.delta_v_bar.has_value() && !rec.derived_accel.has_value();
}

double reconstruct_delta_v_bar(const sim::Observation& obs, const sim::SimConfig& sim_cfg,
                               const sim::RoadConfig& road) {
  const Eigen::Vector2d p_rel(obs.headway + sim_cfg.vehicle_length, road.lane_width);
  const Eigen::Vector2d v_rel(obs.pov_speed - obs.vut_speed, 0.0);
  return ssm::delta_v_bar(p_rel, v_rel);
}

std::vector<AggressivenessRecord> sample_ayss(const rl::DuelingNet& spcp, const std::string& group,
                                              std::uint64_t seed, const AyssFilterConfig& filter,
                                              const SampleOptions& options,
                                              const sim::SimConfig& sim_cfg,
                                              const sim::RoadConfig& road, Rng& rng) {
  filter.validate();
  if (options.n_samples <= 0) throw std::invalid_argument("sample_ayss: n_samples must be positive");
  if (!(options.bin_width > 0.0)) throw std::invalid_argument("sample_ayss: bin_width must be positive");
  const bool one_lane = filter.scenario_case == sim::Case::one_lane;

  // Every draw consumes the same amount of randomness, so the surviving set is
  // a pure function of the seed.
  std::vector<sim::Observation> kept;
  for (long i = 0; i < options.n_samples; ++i) {
    sim::Observation obs;
    obs.pov_speed = uniform(rng, options.box.speed.low, options.box.speed.high);
    obs.vut_speed = uniform(rng, options.box.speed.low, options.box.speed.high);
    if (one_lane) {
      // (low, high]: mirror the half-open draw.
      obs.headway = options.box.headway.high -
                    uniform(rng, 0.0, options.box.headway.high - options.box.headway.low);
      obs.dim = 3;
    } else {
      obs.headway = uniform(rng, options.box.signed_gap.low, options.box.signed_gap.high);
      obs.same_lane = uniform01(rng) < 0.5 ? 0.0 : 1.0;
      obs.dim = 4;
    }
    if (passes_observation_filter(obs, filter)) kept.push_back(obs);
  }

  const std::vector<int> actions = kernels::omp::greedy_actions(spcp, kept);
  std::vector<AggressivenessRecord> records;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    AggressivenessRecord rec;
    rec.group = group;
    rec.seed = seed;
    rec.obs = kept[i];
    rec.action = actions[i];
    rec.headway_bin = std::floor(rec.obs.headway / options.bin_width) * options.bin_width;
    if (one_lane) {
      const sim::PovCommand cmd = sim::decode_action(sim::Case::one_lane, rec.action, rec.obs.pov_speed);
      rec.derived_accel = sim::speed_controller(rec.obs.pov_speed, cmd.target_speed, sim_cfg);
    } else {
      if (filter.require_lane_change && rec.action != sim::kLaneChangeAction) continue;
      rec.delta_v_bar = reconstruct_delta_v_bar(rec.obs, sim_cfg, road);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------

const CurveBin* CurveReport::find(const std::string& group, double bin_low) const {
  for (const CurveBin& b : bins) {
    if (b.group == group && std::abs(b.bin_low - bin_low) < 1e-9) return &b;
  }
  return nullptr;
}

CurveReport build_curve(std::span<const AggressivenessRecord> records, double bin_width) {
  if (!(bin_width > 0.0)) throw std::invalid_argument("build_curve: bin_width must be positive");
  struct Acc {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;  // Welford
  };
  std::map<std::pair<std::string, long>, Acc> acc;
  for (const auto& r : records) {
    const long bin = static_cast<long>(std::floor(r.obs.headway / bin_width));
    Acc& a = acc[{r.group, bin}];
    const double x = r.metric();
    ++a.n;
    const double delta = x - a.mean;
    a.mean += delta / static_cast<double>(a.n);
    a.m2 += delta * (x - a.mean);
  }
  CurveReport report;
  report.bin_width = bin_width;
  for (const auto& [key, a] : acc) {
    if (a.n < 2) continue;
    CurveBin b;
    b.group = key.first;
    b.bin_low = static_cast<double>(key.second) * bin_width;
    b.bin_high = b.bin_low + bin_width;
    b.n = a.n;
    b.mean = a.mean;
    const double sd = std::sqrt(a.m2 / static_cast<double>(a.n - 1));
    const double half = 1.959963984540054 * sd / std::sqrt(static_cast<double>(a.n));
    b.ci_low = a.mean - half;
    b.ci_high = a.mean + half;
    report.bins.push_back(b);
  }
  return report;
}

// ---------------------------------------------------------------------------

SafetyOutcomeRow safety_outcome_study(const rl::DuelingNet& spcp, const sim::Scene& scene,
                                      std::span<const sim::InitialCondition> starts,
                                      const std::string& group, std::uint64_t seed) {
  SafetyOutcomeRow row;
  row.group = group;
  row.seed = seed;
  row.n_episodes = static_cast<int>(starts.size());
  if (starts.empty()) return row;
  const auto summaries = kernels::omp::rollout_greedy(scene, spcp, starts);
  const bool two_lane = scene.scenario_case == sim::Case::two_lane;
  int crashes = 0;
  int lane_changes = 0;
  for (const auto& s : summaries) {
    crashes += s.collided ? 1 : 0;
    lane_changes += s.lane_changed ? 1 : 0;
    if (two_lane && (!s.lane_changed || s.collided)) continue;
    row.mean_episode_reward += s.episode_reward;
    row.mean_final_headway += s.final_headway;
    ++row.n_used;
  }
  const double n = static_cast<double>(summaries.size());
  row.crash_rate = 100.0 * crashes / n;
  if (two_lane) row.lane_change_rate = 100.0 * lane_changes / n;
  if (row.n_used > 0) {
    row.mean_episode_reward /= row.n_used;
    row.mean_final_headway /= row.n_used;
  }
  return row;
}

// ---------------------------------------------------------------------------

double Verdict::fraction_b_more_aggressive() const {
  if (common_bins.empty()) return 0.0;
  return static_cast<double>(bins_b_more_aggressive) / static_cast<double>(common_bins.size());
}

std::string Verdict::summary() const {
  std::ostringstream os;
  switch (kind) {
    case VerdictKind::b_safer:
      os << group_b << " safer";
      break;
    case VerdictKind::a_safer:
      os << group_a << " safer";
      break;
    case VerdictKind::inconclusive:
      os << "inconclusive";
      break;
  }
  os << " (" << group_b << " more aggressive in " << bins_b_more_aggressive << "/"
     << common_bins.size() << " common bins, " << group_a << " in " << bins_a_more_aggressive
     << ")";
  if (!note.empty()) os << "; " << note;
  return os.str();
}

Verdict compare_vuts(const CurveReport& curve, std::span<const SafetyOutcomeRow> outcomes,
                     const std::string& group_a, const std::string& group_b,
                     const CompareOptions& options) {
  Verdict v;
  v.group_a = group_a;
  v.group_b = group_b;
  for (const CurveBin& a : curve.bins) {
    if (a.group != group_a || a.n < options.min_records) continue;
    if (a.bin_low < options.headway_low - 1e-9 || a.bin_high > options.headway_high + 1e-9) continue;
    const CurveBin* b = curve.find(group_b, a.bin_low);
    if (!b || b->n < options.min_records) continue;
    v.common_bins.push_back({a.bin_low, a.mean, b->mean});
    if (b->mean < a.mean) ++v.bins_b_more_aggressive;
    if (a.mean < b->mean) ++v.bins_a_more_aggressive;
  }
  const double n = static_cast<double>(v.common_bins.size());
  if (v.common_bins.empty()) {
    v.note = "no overlapping headway bins";
  } else if (v.bins_b_more_aggressive >= options.majority * n) {
    v.kind = VerdictKind::b_safer;
  } else if (v.bins_a_more_aggressive >= options.majority * n) {
    v.kind = VerdictKind::a_safer;
  }

  int na = 0, nb = 0;
  for (const SafetyOutcomeRow& r : outcomes) {
    if (r.group == group_a) {
      v.mean_reward_a += r.mean_episode_reward;
      v.mean_crash_a += r.crash_rate;
      ++na;
    } else if (r.group == group_b) {
      v.mean_reward_b += r.mean_episode_reward;
      v.mean_crash_b += r.crash_rate;
      ++nb;
    }
  }
  if (na > 0 && nb > 0) {
    v.mean_reward_a /= na;
    v.mean_crash_a /= na;
    v.mean_reward_b /= nb;
    v.mean_crash_b /= nb;
    const double scale = std::max(std::abs(v.mean_reward_a), std::abs(v.mean_reward_b));
    const bool reward_close = scale == 0.0 || std::abs(v.mean_reward_a - v.mean_reward_b) <=
                                                  options.reward_parity_tolerance * scale;
    v.outcome_parity = reward_close && std::abs(v.mean_crash_a - v.mean_crash_b) <=
                                           options.crash_parity_tolerance;
  }
  return v;
}

}  // namespace ayss::eval
