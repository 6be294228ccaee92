#pragma once

// Baseline schedulers and trajectory controllers. They read only the flat
// observation vectors (through the environment's layouts) and always emit
// feasible actions.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iab/env.hpp"
#include "iab/rng.hpp"

namespace iab {

enum class SchedulerKind { round_robin, random, greedy };
enum class TrajectoryKind { stationary, centroid };

SchedulerKind parse_scheduler(std::string_view name);
TrajectoryKind parse_trajectory(std::string_view name);
std::string_view to_string(SchedulerKind k);
std::string_view to_string(TrajectoryKind k);

/// Candidate eligibility (non-empty buffer) decoded from a short observation.
std::vector<std::uint8_t> decode_eligibility(std::span<const double> obs,
                                             const ObservationLayout& layout);

/// Buffer triples decoded from a short observation, in candidate order.
std::vector<BufferTriple> decode_buffers(std::span<const double> obs,
                                         const ObservationLayout& layout);

/// Rotation over the static candidate list. The cursor marks the next
/// candidate to consider; ineligible candidates are skipped without using a grant.
class RoundRobin {
 public:
  explicit RoundRobin(std::size_t n_candidates = 0) : n_(n_candidates) {}

  std::vector<std::uint8_t> select(std::span<const std::uint8_t> eligible, int capacity);
  std::size_t cursor() const { return cursor_; }

 private:
  std::size_t n_ = 0;
  std::size_t cursor_ = 0;
};

/// Uniform choice of min(C, eligible) candidates.
std::vector<std::uint8_t> random_schedule(std::span<const std::uint8_t> eligible, int capacity,
                                          rng::Engine& rng);

/// Scores ordering candidates by head-of-line latency, then backlog; the
/// environment resolves remaining ties to the lower index.
std::vector<double> greedy_scores(std::span<const BufferTriple> buffers,
                                  std::span<const std::uint8_t> eligible);

/// Velocity toward the user centroid. Speed is the distance that closes the
/// gap within one block, capped at v_max; components are clamped to +-v_max.
Velocity track_centroid(const Vec3& own, const Vec3& centroid, double v_max,
                        double block_seconds);

/// Per-environment baseline driver holding every policy's state.
class BaselinePolicy {
 public:
  BaselinePolicy(const Environment& env, SchedulerKind scheduler, TrajectoryKind trajectory,
                 std::uint64_t seed);

  ActionInput act(const Observations& obs);

  SchedulerKind scheduler() const { return scheduler_; }
  TrajectoryKind trajectory() const { return trajectory_; }

 private:
  const Environment& env_;
  SchedulerKind scheduler_;
  TrajectoryKind trajectory_;
  std::vector<RoundRobin> rr_;
  rng::Engine rng_;
};

}  // namespace iab
