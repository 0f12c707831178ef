// Serial reference against the OpenMP kernels on evaluation-sized workloads.

#include <chrono>
#include <cstdio>
#include <vector>

#include "ayss/kernels.hpp"
#include "ayss/training.hpp"

using namespace ayss;

namespace {

template <class F>
double best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return best;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", kernels::thread_count());
  Rng rng(1);
  const sim::Case c = sim::Case::one_lane;
  rl::DuelingNet net(3, sim::action_count(c), 256);
  net.init(rng);

  std::vector<sim::Observation> obs(100000);
  for (auto& o : obs) {
    o.pov_speed = uniform(rng, 0.0, 40.0);
    o.vut_speed = uniform(rng, 0.0, 40.0);
    o.headway = uniform(rng, 0.0, 100.0);
  }
  std::vector<int> a, b;
  const double ts = best_of(3, [&] { a = kernels::serial::greedy_actions(net, obs); });
  const double tp = best_of(3, [&] { b = kernels::omp::greedy_actions(net, obs); });
  std::printf("greedy_actions  n=%zu  serial %.3f s  omp %.3f s  speedup %.2fx  %s\n", obs.size(),
              ts, tp, ts / tp, a == b ? "identical" : "MISMATCH");

  const auto scene = train::make_scene(c, sim::SimConfig{}, ssm::RewardConfig{}, vut::preset("pi1"));
  const auto starts = train::evaluation_starts(scene.sim, c, 7, 200);
  std::vector<sim::EpisodeSummary> ra, rb;
  const double rs = best_of(3, [&] { ra = kernels::serial::rollout_greedy(scene, net, starts); });
  const double rp = best_of(3, [&] { rb = kernels::omp::rollout_greedy(scene, net, starts); });
  bool same = ra.size() == rb.size();
  for (std::size_t i = 0; same && i < ra.size(); ++i) {
    same = ra[i].episode_reward == rb[i].episode_reward && ra[i].steps == rb[i].steps;
  }
  std::printf("rollout_greedy  n=%zu  serial %.3f s  omp %.3f s  speedup %.2fx  %s\n", starts.size(),
              rs, rp, rs / rp, same ? "identical" : "MISMATCH");
  return a == b && same ? 0 : 1;
}
