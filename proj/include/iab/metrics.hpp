#pragma once

// Episode runner and metrics files: episodes.csv (one row per episode),
// slots.jsonl (per-slot records), RSSI sample dumps and a summary with 95%
// confidence intervals.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "iab/config.hpp"
#include "iab/env.hpp"
#include "iab/policies.hpp"

namespace iab {

inline constexpr int kMetricsSchemaVersion = 1;

/// packets * N_p / (L_e * T) / 1e6.
double packets_to_mbps(std::int64_t packets, const ScenarioConfig& cfg);

struct EpisodeMetrics {
  int episode = 0;
  EpisodeSeeds seeds;
  std::string config_hash;
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::int64_t residual = 0;
  int max_delivered_age = -1;
  std::vector<std::int64_t> delivered_per_uav;
  std::vector<std::int64_t> dropped_per_uav;
  double delivered_mbps = 0.0;
  double dropped_mbps = 0.0;
  std::vector<double> delivered_mbps_per_uav;
  std::vector<double> dropped_mbps_per_uav;
  std::vector<std::int64_t> slot_delivered;
  std::vector<std::int64_t> slot_dropped;
};

/// Seeds for episode e of a run: the layout is fixed by the run seed, the
/// traffic and fading vary per episode.
EpisodeSeeds episode_seeds(std::uint64_t run_seed, int episode);

/// Runs one full episode with a baseline policy. When `trace` is set, one
/// JSON line per slot (including ledger rows) is appended to it.
EpisodeMetrics run_episode(Environment& env, SchedulerKind scheduler, TrajectoryKind trajectory,
                           EpisodeSeeds seeds, int episode, std::ostream* trace = nullptr);

/// Slot record written to slots.jsonl.
nlohmann::json slot_record(int episode, const TransitionRecord& tr);

/// Large-scale RSSI (dBm) of every selected user at the initial layout:
/// the best serving UAV with relays deployed, and the donor alone.
struct RssiSamples {
  std::vector<double> with_uuav;
  std::vector<double> tuav_only;
};
RssiSamples rssi_samples(const WorldState& world, const ScenarioConfig& cfg);

struct Stat {
  double mean = 0.0;
  double ci95 = 0.0;  // half-width
  std::size_t n = 0;
};

/// Mean and Student-t 95% half-width; n = 1 gives half-width 0.
Stat mean_ci(const std::vector<double>& xs);

/// First 1-based index whose value reaches 95% of the terminal mean (mean of
/// the last 10%, at least one point). Returns 0 for an empty series.
int convergence_episode(const std::vector<double>& series);

struct RunOptions {
  SchedulerKind scheduler = SchedulerKind::round_robin;
  TrajectoryKind trajectory = TrajectoryKind::stationary;
  int episodes = 1;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  bool trace_slots = false;
  bool dump_rssi = false;
  int jobs = 1;
};

struct RunResult {
  std::vector<EpisodeMetrics> episodes;
  nlohmann::json summary;
};

/// Runs the episodes and writes episodes.csv, summary.json and the optional
/// slots.jsonl / rssi_*.csv into out_dir.
RunResult run(const ScenarioConfig& cfg, const RunOptions& opt);

std::string episodes_csv_header(int n_uav);
std::string episodes_csv_row(const EpisodeMetrics& m);

/// Summary over episodes: total and per-UAV delivered throughput with 95% CI.
nlohmann::json summarize_episodes(const std::vector<EpisodeMetrics>& eps);

/// One parsed episodes.csv.
struct EpisodeTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::vector<double> column(const std::string& name) const;
};
EpisodeTable read_episodes_csv(const std::filesystem::path& path);

/// Across-run summary: each file is one run, reduced to its per-episode mean;
/// the means are averaged with a 95% CI. The convergence episode is taken on
/// the run-averaged delivered series.
nlohmann::json summarize(const std::vector<std::filesystem::path>& files);

/// Human-readable table for a summary object.
std::string format_summary(const nlohmann::json& summary);

}  // namespace iab
