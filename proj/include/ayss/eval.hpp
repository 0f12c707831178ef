#pragma once

// AYSS generation at d = 1 by Monte-Carlo sampling of an SPCP's observation
// space, aggressiveness curves, overall safety outcomes and VUT comparison.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ayss/nn.hpp"
#include "ayss/sim.hpp"

namespace ayss::eval {

struct AyssFilterConfig {
  sim::Case scenario_case = sim::Case::one_lane;
  // one_lane: keep safety-critical states, drop unavoidable collisions
  double max_headway = 5.0;
  double min_ttc = 0.2;
  // two_lane: keep cut-ins that start with the POV fully ahead
  bool require_lane_change = true;
  bool require_rear_ahead = true;

  void validate() const;
};

/// Box the observations are drawn from.
struct ObservationBox {
  sim::Interval speed{0.0, 40.0};
  sim::Interval headway{0.0, 100.0};   // one_lane, lower end excluded
  sim::Interval signed_gap{-10.0, 100.0};  // two_lane
};

struct AggressivenessRecord {
  std::string group;  // VUT id of the SPCP
  std::uint64_t seed = 0;
  sim::Observation obs;
  int action = 0;
  std::optional<double> derived_accel;  // one_lane
  std::optional<double> delta_v_bar;    // two_lane
  double headway_bin = 0.0;             // lower edge of the headway bin

  double metric() const { return derived_accel ? *derived_accel : delta_v_bar.value_or(0.0); }
};

struct SampleOptions {
  long n_samples = 100000;
  double bin_width = 0.25;
  ObservationBox box;
};

/// Draws n_samples observations, queries the greedy SPCP action and keeps
/// the records that pass every AYSS predicate.
std::vector<AggressivenessRecord> sample_ayss(const rl::DuelingNet& spcp, const std::string& group,
                                              std::uint64_t seed, const AyssFilterConfig& filter,
                                              const SampleOptions& options,
                                              const sim::SimConfig& sim_cfg,
                                              const sim::RoadConfig& road, Rng& rng);

/// Observation-only AYSS predicates (applied before the policy is queried).
bool passes_observation_filter(const sim::Observation& obs, const AyssFilterConfig& filter);
/// Full predicate on an emitted record.
bool passes_filter(const AggressivenessRecord& rec, const AyssFilterConfig& filter);

/// Relative position and velocity of the POV with respect to the VUT,
/// reconstructed with the POV centered on the adjacent left lane, heading 0.
double reconstruct_delta_v_bar(const sim::Observation& obs, const sim::SimConfig& sim_cfg,
                               const sim::RoadConfig& road);

struct CurveBin {
  double bin_low = 0.0;
  double bin_high = 0.0;
  std::string group;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t n = 0;
};

struct CurveReport {
  double bin_width = 0.25;
  std::vector<CurveBin> bins;  // sorted by (group, bin_low); bins with n < 2 omitted

  const CurveBin* find(const std::string& group, double bin_low) const;
};

/// Per group and headway bin: mean and normal-approximation 95% CI.
CurveReport build_curve(std::span<const AggressivenessRecord> records, double bin_width);

struct SafetyOutcomeRow {
  std::string group;
  std::uint64_t seed = 0;
  double crash_rate = 0.0;  // percent
  std::optional<double> lane_change_rate;
  double mean_episode_reward = 0.0;
  double mean_final_headway = 0.0;
  int n_episodes = 0;
  int n_used = 0;  // episodes entering the reward/headway means
};

/// Full greedy episodes from the given starts. One-lane means use every
/// episode; two-lane means use lane-changing, collision-free episodes.
SafetyOutcomeRow safety_outcome_study(const rl::DuelingNet& spcp, const sim::Scene& scene,
                                      std::span<const sim::InitialCondition> starts,
                                      const std::string& group, std::uint64_t seed);

enum class VerdictKind { b_safer, a_safer, inconclusive };

struct CompareOptions {
  double majority = 0.8;
  std::size_t min_records = 2;
  double headway_low = 0.0;
  double headway_high = 1e300;
  double reward_parity_tolerance = 0.15;  // relative difference of group means
  double crash_parity_tolerance = 5.0;    // percentage points
};

struct BinComparison {
  double bin_low = 0.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

struct Verdict {
  VerdictKind kind = VerdictKind::inconclusive;
  std::string group_a, group_b;
  std::vector<BinComparison> common_bins;
  std::size_t bins_b_more_aggressive = 0;
  std::size_t bins_a_more_aggressive = 0;
  std::string note;
  // Overall safety outcome parity between the groups.
  bool outcome_parity = false;
  double mean_reward_a = 0.0, mean_reward_b = 0.0;
  double mean_crash_a = 0.0, mean_crash_b = 0.0;

  double fraction_b_more_aggressive() const;
  std::string summary() const;
};

/// "b safer" iff group b's SPCPs are more aggressive (smaller metric: harder
/// braking or smaller delta-v-bar) in at least `majority` of common bins.
Verdict compare_vuts(const CurveReport& curve, std::span<const SafetyOutcomeRow> outcomes,
                     const std::string& group_a, const std::string& group_b,
                     const CompareOptions& options = {});

}  // namespace ayss::eval
