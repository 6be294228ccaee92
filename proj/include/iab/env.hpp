#pragma once

// Two-timescale environment: per-slot scheduling for every UAV, per-block
// velocity control for the relays.
//
// Slot order: arrivals, observation, scheduling + transmission, drop sweep,
// mobility. Long actions are due at slots n with n % long_block == 0.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iab/config.hpp"
#include "iab/link.hpp"
#include "iab/rng.hpp"
#include "iab/scenario.hpp"
#include "iab/traffic.hpp"

namespace iab {

struct FieldLayout {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Describes how a flat observation vector decodes into named fields.
struct ObservationLayout {
  std::vector<FieldLayout> fields;
  std::size_t size = 0;

  const FieldLayout& field(std::string_view name) const;
  void append(std::string name, std::size_t length);
};

/// A scheduling action: either a score per candidate (top-k taken inside the
/// environment) or an explicit binary mask that must already be feasible.
struct ShortAction {
  enum class Mode { scores, mask };
  Mode mode = Mode::scores;
  std::vector<double> scores;
  std::vector<std::uint8_t> mask;

  static ShortAction from_scores(std::vector<double> s) {
    return {Mode::scores, std::move(s), {}};
  }
  static ShortAction from_mask(std::vector<std::uint8_t> m) { return {Mode::mask, {}, std::move(m)}; }
};

struct ActionInput {
  std::vector<ShortAction> short_actions;               // one per UAV, donor first
  std::optional<std::vector<Velocity>> long_actions;    // one per relay, block boundaries only
};

struct Observations {
  int slot = 0;
  bool long_action_due = false;
  std::vector<std::vector<double>> short_obs;  // per UAV
  std::vector<std::vector<double>> long_obs;   // per relay
};

struct LinkReport {
  int uav = 0;
  LinkTarget target;
  double sinr = 0.0;
  std::int64_t capacity = 0;
  std::int64_t n_tx = 0;
};

struct StepInfo {
  int slot = 0;
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t relayed = 0;
  std::int64_t dropped = 0;
  std::vector<std::int64_t> delivered_per_uav;
  std::vector<std::int64_t> dropped_per_uav;  // by the UAV holding the packet
  int max_delivered_age = -1;
  std::vector<LinkReport> links;
  ScheduleDecision schedule;
  std::vector<Velocity> applied_velocities;  // set on block-boundary steps
  std::vector<LedgerRow> ledger;             // only when ledger recording is on
};

struct TransitionRecord {
  std::vector<double> short_rewards;
  double global_short_reward = 0.0;
  std::optional<std::vector<double>> long_rewards;  // set when a block completes
  double global_long_reward = 0.0;
  Observations next;
  bool done = false;
  StepInfo info;
};

/// World layout seed and traffic/fading seed. A single seed sets both.
struct EpisodeSeeds {
  std::uint64_t scenario = 0;
  std::uint64_t dynamics = 0;
};

struct EpisodeTotals {
  std::int64_t arrivals = 0;
  std::int64_t delivered = 0;
  std::int64_t dropped = 0;
  std::vector<std::int64_t> delivered_per_uav;
  std::vector<std::int64_t> dropped_per_uav;
  int max_delivered_age = -1;
};

/// Top-C feasible schedule from a score vector (ties to the lower index), or
/// validation of a mask. Throws Error(invalid_action) naming the constraint.
std::vector<std::uint8_t> sanitize_short_action(const ShortAction& action,
                                                std::span<const std::uint8_t> eligible,
                                                int capacity);

/// Per-axis clamp to [-v_max, v_max]. Throws Error(invalid_action) on NaN.
Velocity clamp_velocity(const Velocity& v, double v_max);

/// Mean (or sum) of a block of short rewards; the mean divides by long_block.
double long_reward(std::span<const double> block, int long_block,
                   LongRewardMode mode = LongRewardMode::mean);

class Environment {
 public:
  explicit Environment(ScenarioConfig cfg);

  Observations reset(std::uint64_t seed);
  Observations reset(EpisodeSeeds seeds);
  TransitionRecord step(const ActionInput& action);

  const ScenarioConfig& config() const { return cfg_; }
  int n_uav() const { return cfg_.n_uuav + 1; }
  int n_short_agents() const { return n_uav(); }
  int n_long_agents() const { return cfg_.n_uuav; }
  int capacity(int uav) const { return uav == kDonor ? cfg_.sched_t : cfg_.sched_u; }
  std::size_t candidate_count(int uav) const;

  const ObservationLayout& short_layout(int uav) const;
  const ObservationLayout& long_layout() const { return long_layout_; }

  bool is_reset() const { return reset_; }
  bool done() const { return done_; }
  int slot() const { return slot_; }
  bool long_action_due() const { return slot_ % cfg_.long_block == 0; }

  const WorldState& world() const { return world_; }
  const QueueState& queues() const { return queues_; }
  const EpisodeTotals& totals() const { return totals_; }
  const std::vector<LinkTarget>& candidates(int uav) const;
  std::vector<std::uint8_t> eligibility(int uav) const;

  Observations observe() const;

  void record_ledger(bool on) { record_ledger_ = on; }

 private:
  std::vector<double> short_observation(int uav) const;
  std::vector<double> long_observation(int relay) const;
  void draw_arrivals();

  ScenarioConfig cfg_;
  std::vector<ObservationLayout> short_layouts_;
  ObservationLayout long_layout_;

  bool reset_ = false;
  bool done_ = false;
  bool record_ledger_ = false;
  int slot_ = 0;
  EpisodeSeeds seeds_;
  WorldState world_;
  QueueState queues_;
  std::vector<std::vector<LinkTarget>> candidates_;
  std::vector<rng::Engine> arrival_streams_;
  std::vector<std::int64_t> pending_arrivals_;

  std::vector<std::vector<double>> prev_sinr_;
  std::vector<std::vector<std::uint8_t>> prev_action_;
  std::vector<double> prev_short_reward_;
  std::vector<Velocity> prev_velocity_;
  std::vector<double> prev_long_reward_;
  std::vector<std::vector<double>> block_rewards_;  // per relay, current block
  EpisodeTotals totals_;
};

}  // namespace iab
