#include "ayss/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "ayss/checkpoint.hpp"
#include "ayss/error.hpp"
#include "ayss/training.hpp"

namespace ayss::cli {

using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeError("cannot write " + path.string());
  out << std::setprecision(10);
  return out;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw RuntimeError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::exception& e) {
    throw RuntimeError(path.string() + ": " + e.what());
  }
}

void provenance_line(std::ostream& out, std::uint64_t hash, const std::string& seed) {
  out << "# config_hash=" << config::hash_hex(hash) << " seed=" << seed << '\n';
}

std::string checkpoint_name(long step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%09ld.bin", step);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

std::string run_dir_name(sim::Case c, const std::string& vut_id, std::uint64_t seed) {
  return std::string(sim::to_string(c)) + "_" + vut_id + "_seed" + std::to_string(seed);
}

fs::path run_dir(const config::ExperimentConfig& cfg, const std::string& vut_id,
                 std::uint64_t seed) {
  return fs::path(cfg.output_dir) / run_dir_name(cfg.scenario_case, vut_id, seed);
}

// ---------------------------------------------------------------------------

TrainOutput cmd_train(const config::ExperimentConfig& cfg, const std::string& vut_id,
                      std::uint64_t seed, const std::optional<fs::path>& out) {
  cfg.validate();
  const train::TrainRunConfig run = cfg.run_config(vut_id, seed);
  const std::uint64_t hash = config::config_hash(cfg);

  TrainOutput result;
  result.dir = out.value_or(run_dir(cfg, vut_id, seed));
  const fs::path ckpt_dir = result.dir / "checkpoints";
  // Completion marker first: an interrupted rerun must not look finished.
  fs::remove(result.dir / "run.json");
  fs::remove_all(ckpt_dir);
  fs::remove(result.dir / "train.csv");
  fs::remove(result.dir / "spcp.txt");
  fs::create_directories(ckpt_dir);
  config::save(cfg, result.dir / "config.json");

  auto csv = open_out(result.dir / "train.csv");
  provenance_line(csv, hash, std::to_string(seed));
  csv << "step_index,eval_mean_episode_reward,crash_rate\n";

  const train::TrainResult trained = train::train_pov(
      run, cfg.sim, cfg.reward, cfg.dqn, cfg.vut(vut_id), hash,
      [&](const rl::PolicyCheckpoint& ckpt) {
        rl::save_checkpoint(ckpt, ckpt_dir / checkpoint_name(static_cast<long>(ckpt.step_index)));
        csv << ckpt.step_index << ',' << ckpt.eval_mean_episode_reward << ','
            << ckpt.eval_crash_rate << '\n';
        csv.flush();
      });
  result.checkpoints = trained.checkpoints;
  result.selected = train::select_spcp(result.checkpoints);
  const auto& best = result.checkpoints[result.selected];
  open_out(result.dir / "spcp.txt") << checkpoint_name(static_cast<long>(best.step_index)) << '\n';

  const json meta = {{"case", std::string(sim::to_string(cfg.scenario_case))},
                     {"vut", vut_id},
                     {"seed", seed},
                     {"config_hash", config::hash_hex(hash)},
                     {"env_steps", trained.env_steps},
                     {"updates", trained.updates},
                     {"episodes", trained.episodes},
                     {"checkpoints", trained.checkpoints.size()},
                     {"spcp", checkpoint_name(static_cast<long>(best.step_index))}};
  open_out(result.dir / "run.json") << meta.dump(2) << '\n';
  return result;
}

// ---------------------------------------------------------------------------

Manifest cmd_select(const config::ExperimentConfig& cfg, const std::vector<fs::path>& run_dirs) {
  const std::uint64_t hash = config::config_hash(cfg);
  Manifest manifest;
  manifest.scenario_case = cfg.scenario_case;
  manifest.config_hash = hash;
  std::vector<std::string> problems;
  for (const fs::path& dir : run_dirs) {
    const fs::path marker = dir / "run.json";
    if (!fs::exists(marker)) {
      problems.push_back(dir.string() + " (missing or incomplete)");
      continue;
    }
    const json meta = read_json(marker);
    if (meta.value("config_hash", "") != config::hash_hex(hash)) {
      problems.push_back(dir.string() + " (trained with a different config)");
      continue;
    }
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir / "checkpoints")) {
      if (e.path().extension() == ".bin") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      problems.push_back(dir.string() + " (no checkpoints)");
      continue;
    }
    std::vector<rl::PolicyCheckpoint> candidates;
    for (const auto& f : files) candidates.push_back(rl::load_checkpoint(f));
    const std::size_t best = train::select_spcp(candidates);
    ManifestEntry entry;
    entry.vut_id = meta.at("vut").get<std::string>();
    entry.seed = meta.at("seed").get<std::uint64_t>();
    entry.checkpoint = fs::absolute(files[best]);
    entry.step_index = candidates[best].step_index;
    entry.eval_mean_episode_reward = candidates[best].eval_mean_episode_reward;
    entry.eval_crash_rate = candidates[best].eval_crash_rate;
    manifest.entries.push_back(entry);
  }
  if (!problems.empty()) {
    std::string msg = "cannot select SPCPs; unusable runs:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw RuntimeError(msg);
  }
  return manifest;
}

Manifest cmd_select(const config::ExperimentConfig& cfg) {
  std::vector<fs::path> dirs;
  for (const auto& v : cfg.vuts) {
    for (std::uint64_t seed : cfg.seeds) dirs.push_back(run_dir(cfg, v.id, seed));
  }
  return cmd_select(cfg, dirs);
}

void save_manifest(const Manifest& m, const fs::path& path) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    entries.push_back({{"vut", e.vut_id},
                       {"seed", e.seed},
                       {"checkpoint", e.checkpoint.string()},
                       {"step_index", e.step_index},
                       {"eval_mean_episode_reward", e.eval_mean_episode_reward},
                       {"eval_crash_rate", e.eval_crash_rate}});
  }
  const json doc = {{"schema_version", config::kSchemaVersion},
                    {"case", std::string(sim::to_string(m.scenario_case))},
                    {"config_hash", config::hash_hex(m.config_hash)},
                    {"entries", entries}};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  open_out(path) << doc.dump(2) << '\n';
}

Manifest load_manifest(const fs::path& path) {
  const json doc = read_json(path);
  Manifest m;
  try {
    m.scenario_case = sim::case_from_string(doc.at("case").get<std::string>());
    m.config_hash = std::stoull(doc.at("config_hash").get<std::string>(), nullptr, 16);
    for (const auto& e : doc.at("entries")) {
      ManifestEntry entry;
      entry.vut_id = e.at("vut").get<std::string>();
      entry.seed = e.at("seed").get<std::uint64_t>();
      entry.checkpoint = e.at("checkpoint").get<std::string>();
      entry.step_index = e.at("step_index").get<std::uint64_t>();
      entry.eval_mean_episode_reward = e.at("eval_mean_episode_reward").get<double>();
      entry.eval_crash_rate = e.at("eval_crash_rate").get<double>();
      m.entries.push_back(entry);
    }
  } catch (const std::exception& e) {
    throw RuntimeError(path.string() + ": malformed manifest: " + e.what());
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_summary(sim::Case c, std::uint64_t hash,
                           const std::vector<eval::SafetyOutcomeRow>& outcomes,
                           const std::vector<eval::Verdict>& verdicts, std::size_t n_vuts) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "case " << sim::to_string(c) << "  config_hash=" << config::hash_hex(hash) << "\n\n";
  os << "safety outcomes\n";
  os << std::left << std::setw(10) << "group" << std::setw(8) << "seed" << std::setw(10) << "crash%";
  if (c == sim::Case::two_lane) os << std::setw(10) << "lc%";
  os << std::setw(10) << "r_bar" << std::setw(10) << "h_bar" << "episodes\n";
  for (const auto& r : outcomes) {
    os << std::setw(10) << r.group << std::setw(8) << r.seed << std::setw(10) << r.crash_rate;
    if (c == sim::Case::two_lane) os << std::setw(10) << r.lane_change_rate.value_or(0.0);
    os << std::setw(10) << r.mean_episode_reward << std::setw(10) << r.mean_final_headway
       << r.n_used << "/" << r.n_episodes << '\n';
  }
  os << '\n';
  if (n_vuts < 2) {
    os << "comparison skipped: the manifest holds a single VUT\n";
  }
  for (const auto& v : verdicts) {
    os << "verdict " << v.group_a << " vs " << v.group_b << ": " << v.summary() << '\n';
    os << "  outcome parity " << (v.outcome_parity ? "yes" : "no") << " (r_bar " << v.mean_reward_a
       << " vs " << v.mean_reward_b << ", crash% " << v.mean_crash_a << " vs " << v.mean_crash_b
       << ")\n";
  }
  return os.str();
}

}  // namespace

EvaluationReport cmd_evaluate(const Manifest& manifest, const config::ExperimentConfig& cfg,
                              const fs::path& out, const EvaluateOptions& options) {
  cfg.validate();
  if (manifest.entries.empty()) throw RuntimeError("manifest has no entries");
  if (manifest.scenario_case != cfg.scenario_case) {
    throw ConfigError("manifest case does not match the config case");
  }
  const std::uint64_t hash = config::config_hash(cfg);
  const long n_samples = options.n_samples.value_or(cfg.ayss.n_samples);
  const int n_episodes = options.n_episodes.value_or(cfg.ayss.n_episodes);
  if (n_samples <= 0) throw ConfigError("--n-samples must be positive");
  if (n_episodes <= 0) throw ConfigError("--n-episodes must be positive");

  EvaluationReport report;
  report.dir = out;
  fs::create_directories(out);
  const sim::RoadConfig road = sim::RoadConfig::for_case(cfg.scenario_case);
  eval::SampleOptions sample_opts;
  sample_opts.n_samples = n_samples;
  sample_opts.bin_width = cfg.ayss.bin_width;

  std::vector<std::string> groups;
  for (const auto& entry : manifest.entries) {
    const rl::PolicyCheckpoint ckpt = rl::load_checkpoint(entry.checkpoint);
    if (ckpt.scenario_case != cfg.scenario_case) {
      throw RuntimeError(entry.checkpoint.string() + ": checkpoint case does not match the config");
    }
    const vut::VutSpec& spec = cfg.vut(entry.vut_id);
    if (std::find(groups.begin(), groups.end(), spec.id) == groups.end()) groups.push_back(spec.id);

    Rng mc_rng(stream_seed(entry.seed, kStreamMonteCarlo));
    auto recs = eval::sample_ayss(ckpt.net, spec.id, entry.seed, cfg.ayss.filter, sample_opts,
                                  cfg.sim, road, mc_rng);
    report.records.insert(report.records.end(), recs.begin(), recs.end());

    // Same starts for every VUT with the same seed.
    const auto starts = train::evaluation_starts(cfg.sim, cfg.scenario_case,
                                                 stream_seed(entry.seed, kStreamOutcome), n_episodes);
    const sim::Scene scene = train::make_scene(cfg.scenario_case, cfg.sim, cfg.reward, spec);
    report.outcomes.push_back(eval::safety_outcome_study(ckpt.net, scene, starts, spec.id, entry.seed));
  }
  report.curve = eval::build_curve(report.records, cfg.ayss.bin_width);

  // Order groups as the config lists them.
  std::vector<std::string> ordered;
  for (const auto& v : cfg.vuts) {
    if (std::find(groups.begin(), groups.end(), v.id) != groups.end()) ordered.push_back(v.id);
  }
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    for (std::size_t j = i + 1; j < ordered.size(); ++j) {
      report.verdicts.push_back(
          eval::compare_vuts(report.curve, report.outcomes, ordered[i], ordered[j], cfg.ayss.compare));
    }
  }

  const bool one_lane = cfg.scenario_case == sim::Case::one_lane;
  {
    auto f = open_out(out / "records.csv");
    provenance_line(f, hash, "all");
    f << "group,seed,pov_speed,vut_speed,headway,same_lane,action,"
      << (one_lane ? "derived_accel" : "delta_v_bar") << ",headway_bin\n";
    for (const auto& r : report.records) {
      f << r.group << ',' << r.seed << ',' << r.obs.pov_speed << ',' << r.obs.vut_speed << ','
        << r.obs.headway << ',' << r.obs.same_lane << ',' << r.action << ',' << r.metric() << ','
        << r.headway_bin << '\n';
    }
  }
  {
    auto f = open_out(out / "curve.csv");
    provenance_line(f, hash, "all");
    f << "bin_low,bin_high,group,mean,ci_low,ci_high,n\n";
    for (const auto& b : report.curve.bins) {
      f << b.bin_low << ',' << b.bin_high << ',' << b.group << ',' << b.mean << ',' << b.ci_low
        << ',' << b.ci_high << ',' << b.n << '\n';
    }
  }
  {
    auto f = open_out(out / "outcomes.csv");
    provenance_line(f, hash, "all");
    f << "group,seed,crash_rate,lane_change_rate,mean_episode_reward,mean_final_headway,n_episodes,"
         "n_used\n";
    for (const auto& r : report.outcomes) {
      f << r.group << ',' << r.seed << ',' << r.crash_rate << ',';
      if (r.lane_change_rate) f << *r.lane_change_rate;
      f << ',' << r.mean_episode_reward << ',' << r.mean_final_headway << ',' << r.n_episodes << ','
        << r.n_used << '\n';
    }
  }
  report.summary =
      format_summary(cfg.scenario_case, hash, report.outcomes, report.verdicts, ordered.size());
  open_out(out / "verdict.txt") << report.summary;
  return report;
}

std::string cmd_report(const fs::path& report_dir) {
  const fs::path verdict = report_dir / "verdict.txt";
  const fs::path curve = report_dir / "curve.csv";
  std::ostringstream os;
  os << read_text(verdict);
  // Per-bin comparison table rebuilt from the curve file.
  std::ifstream in(curve);
  if (!in) throw RuntimeError("cannot read " + curve.string());
  std::map<double, std::map<std::string, std::pair<double, std::string>>> rows;
  std::set<std::string> groups;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    const auto cells = split_csv(line);
    if (cells.size() != 7) throw RuntimeError(curve.string() + ": malformed row '" + line + "'");
    rows[std::stod(cells[0])][cells[2]] = {std::stod(cells[3]), cells[6]};
    groups.insert(cells[2]);
  }
  os << "\naggressiveness curve (mean per headway bin)\n";
  os << std::left << std::setw(10) << "bin_low";
  for (const auto& g : groups) os << std::setw(18) << g;
  os << '\n' << std::fixed << std::setprecision(3);
  for (const auto& [bin, by_group] : rows) {
    os << std::setw(10) << bin;
    for (const auto& g : groups) {
      auto it = by_group.find(g);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3);
      if (it != by_group.end()) cell << it->second.first << " (" << it->second.second << ")";
      else cell << "-";
      os << std::setw(18) << cell.str();
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace ayss::cli
