#include "iab/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iab/errors.hpp"

namespace iab {

SchedulerKind parse_scheduler(std::string_view name) {
  if (name == "roundrobin" || name == "round_robin") return SchedulerKind::round_robin;
  if (name == "random") return SchedulerKind::random;
  if (name == "greedy") return SchedulerKind::greedy;
  throw Error(Errc::invalid_config, "unknown policy '" + std::string(name) + "'");
}

TrajectoryKind parse_trajectory(std::string_view name) {
  if (name == "stationary") return TrajectoryKind::stationary;
  if (name == "centroid") return TrajectoryKind::centroid;
  throw Error(Errc::invalid_config, "unknown trajectory '" + std::string(name) + "'");
}

std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::round_robin: return "roundrobin";
    case SchedulerKind::random: return "random";
    case SchedulerKind::greedy: return "greedy";
  }
  return "?";
}

std::string_view to_string(TrajectoryKind k) {
  return k == TrajectoryKind::stationary ? "stationary" : "centroid";
}

std::vector<BufferTriple> decode_buffers(std::span<const double> obs,
                                         const ObservationLayout& layout) {
  const auto& f = layout.field("buffer");
  std::vector<BufferTriple> out(f.length / 3);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t at = f.offset + 3 * i;
    out[i] = {obs[at], obs[at + 1], obs[at + 2]};
  }
  return out;
}

std::vector<std::uint8_t> decode_eligibility(std::span<const double> obs,
                                             const ObservationLayout& layout) {
  const auto buffers = decode_buffers(obs, layout);
  std::vector<std::uint8_t> e(buffers.size());
  for (std::size_t i = 0; i < buffers.size(); ++i) e[i] = buffers[i].backlog > 0.0 ? 1 : 0;
  return e;
}

std::vector<std::uint8_t> RoundRobin::select(std::span<const std::uint8_t> eligible,
                                             int capacity) {
  if (eligible.size() != n_) {
    n_ = eligible.size();
    cursor_ = 0;
  }
  std::vector<std::uint8_t> mask(n_, 0);
  int granted = 0;
  for (std::size_t step = 0; step < n_ && granted < capacity; ++step) {
    const std::size_t i = (cursor_ + step) % n_;
    if (!eligible[i]) continue;
    mask[i] = 1;
    ++granted;
    if (granted == capacity) {
      cursor_ = (i + 1) % n_;
      return mask;
    }
  }
  // Under-full: every eligible candidate was served; the rotation point stays.
  return mask;
}

std::vector<std::uint8_t> random_schedule(std::span<const std::uint8_t> eligible, int capacity,
                                          rng::Engine& rng) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    if (eligible[i]) pool.push_back(i);
  }
  std::vector<std::size_t> chosen;
  std::sample(pool.begin(), pool.end(), std::back_inserter(chosen),
              static_cast<std::size_t>(std::max(capacity, 0)), rng);
  std::vector<std::uint8_t> mask(eligible.size(), 0);
  for (std::size_t i : chosen) mask[i] = 1;
  return mask;
}

std::vector<double> greedy_scores(std::span<const BufferTriple> buffers,
                                  std::span<const std::uint8_t> eligible) {
  double max_backlog = 0.0;
  for (const auto& b : buffers) max_backlog = std::max(max_backlog, b.backlog);
  std::vector<double> s(buffers.size());
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    s[i] = eligible[i] ? buffers[i].head_latency * (max_backlog + 1.0) + buffers[i].backlog : -1.0;
  }
  return s;
}

Velocity track_centroid(const Vec3& own, const Vec3& centroid, double v_max,
                        double block_seconds) {
  const double dx = centroid.x - own.x;
  const double dy = centroid.y - own.y;
  const double dist = std::hypot(dx, dy);
  if (dist == 0.0) return {};
  const double speed = std::min(v_max, dist / block_seconds);
  return clamp_velocity({speed * dx / dist, speed * dy / dist}, v_max);
}

BaselinePolicy::BaselinePolicy(const Environment& env, SchedulerKind scheduler,
                               TrajectoryKind trajectory, std::uint64_t seed)
    : env_(env),
      scheduler_(scheduler),
      trajectory_(trajectory),
      rng_(rng::substream(seed, rng::Stream::policy)) {
  for (int k = 0; k < env.n_uav(); ++k) rr_.emplace_back(env.candidate_count(k));
}

ActionInput BaselinePolicy::act(const Observations& obs) {
  ActionInput in;
  for (int k = 0; k < env_.n_uav(); ++k) {
    const auto& layout = env_.short_layout(k);
    const std::span<const double> o = obs.short_obs.at(static_cast<std::size_t>(k));
    const auto elig = decode_eligibility(o, layout);
    const int cap = env_.capacity(k);
    switch (scheduler_) {
      case SchedulerKind::round_robin:
        in.short_actions.push_back(
            ShortAction::from_mask(rr_[static_cast<std::size_t>(k)].select(elig, cap)));
        break;
      case SchedulerKind::random:
        in.short_actions.push_back(ShortAction::from_mask(random_schedule(elig, cap, rng_)));
        break;
      case SchedulerKind::greedy:
        in.short_actions.push_back(
            ShortAction::from_scores(greedy_scores(decode_buffers(o, layout), elig)));
        break;
    }
  }
  if (obs.long_action_due) {
    const auto& cfg = env_.config();
    const auto& layout = env_.long_layout();
    std::vector<Velocity> v;
    for (const auto& o : obs.long_obs) {
      if (trajectory_ == TrajectoryKind::stationary) {
        v.push_back({});
        continue;
      }
      const std::size_t p = layout.field("position").offset;
      const std::size_t c = layout.field("user_centroid").offset;
      v.push_back(track_centroid({o[p], o[p + 1], o[p + 2]}, {o[c], o[c + 1], o[c + 2]},
                                 cfg.v_d_max, cfg.long_block * cfg.time_unit));
    }
    in.long_actions = std::move(v);
  }
  return in;
}

}  // namespace iab
