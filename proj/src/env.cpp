#include "iab/env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "iab/channel.hpp"
#include "iab/errors.hpp"
#include "iab/units.hpp"

namespace iab {

const FieldLayout& ObservationLayout::field(std::string_view name) const {
  for (const auto& f : fields) {
    if (f.name == name) return f;
  }
  throw Error(Errc::domain_error, "no observation field '" + std::string(name) + "'");
}

void ObservationLayout::append(std::string name, std::size_t length) {
  fields.push_back({std::move(name), size, length});
  size += length;
}

std::vector<std::uint8_t> sanitize_short_action(const ShortAction& action,
                                                std::span<const std::uint8_t> eligible,
                                                int capacity) {
  const std::size_t n = eligible.size();
  std::vector<std::uint8_t> mask(n, 0);
  if (action.mode == ShortAction::Mode::mask) {
    if (action.mask.size() != n) {
      throw Error(Errc::invalid_action, "mask length " + std::to_string(action.mask.size()) +
                                            " != candidate count " + std::to_string(n));
    }
    int count = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!action.mask[i]) continue;
      if (!eligible[i]) {
        throw Error(Errc::invalid_action,
                    "buffer gating: candidate " + std::to_string(i) + " has an empty buffer");
      }
      mask[i] = 1;
      ++count;
    }
    if (count > capacity) {
      throw Error(Errc::invalid_action, "scheduling limit: " + std::to_string(count) +
                                            " scheduled, limit " + std::to_string(capacity));
    }
    return mask;
  }

  if (action.scores.size() != n) {
    throw Error(Errc::invalid_action, "score length " + std::to_string(action.scores.size()) +
                                          " != candidate count " + std::to_string(n));
  }
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(action.scores[i])) {
      throw Error(Errc::invalid_action, "score " + std::to_string(i) + " is NaN");
    }
    if (eligible[i]) pool.push_back(i);
  }
  std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    return action.scores[a] > action.scores[b];
  });
  const std::size_t take = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(capacity));
  for (std::size_t i = 0; i < take; ++i) mask[pool[i]] = 1;
  return mask;
}

Velocity clamp_velocity(const Velocity& v, double v_max) {
  if (std::isnan(v.vx) || std::isnan(v.vy)) {
    throw Error(Errc::invalid_action, "velocity component is NaN");
  }
  return {std::clamp(v.vx, -v_max, v_max), std::clamp(v.vy, -v_max, v_max)};
}

double long_reward(std::span<const double> block, int long_block, LongRewardMode mode) {
  const double sum = std::accumulate(block.begin(), block.end(), 0.0);
  return mode == LongRewardMode::sum ? sum : sum / long_block;
}

Environment::Environment(ScenarioConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  for (int k = 0; k < n_uav(); ++k) {
    const std::size_t c = candidate_count(k);
    ObservationLayout l;
    l.append("buffer", 3 * c);
    l.append("sinr", c);
    l.append("prev_reward", 1);
    l.append("prev_action", c);
    short_layouts_.push_back(std::move(l));
  }
  long_layout_.append("rssi", static_cast<std::size_t>(cfg_.assoc_u));
  long_layout_.append("prev_reward", 1);
  long_layout_.append("prev_action", 2);
  long_layout_.append("position", 3);
  long_layout_.append("user_centroid", 3);
}

std::size_t Environment::candidate_count(int uav) const {
  return uav == kDonor ? static_cast<std::size_t>(cfg_.n_uuav + cfg_.assoc_t)
                       : static_cast<std::size_t>(cfg_.assoc_u);
}

const ObservationLayout& Environment::short_layout(int uav) const {
  return short_layouts_.at(static_cast<std::size_t>(uav));
}

const std::vector<LinkTarget>& Environment::candidates(int uav) const {
  return candidates_.at(static_cast<std::size_t>(uav));
}

std::vector<std::uint8_t> Environment::eligibility(int uav) const {
  const auto& cands = candidates(uav);
  std::vector<std::uint8_t> e(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) e[i] = queues_.eligible(uav, cands[i]) ? 1 : 0;
  return e;
}

Observations Environment::reset(std::uint64_t seed) { return reset(EpisodeSeeds{seed, seed}); }

Observations Environment::reset(EpisodeSeeds seeds) {
  seeds_ = seeds;
  world_ = init_world(cfg_, seeds.scenario);
  queues_ = QueueState(world_.association);
  candidates_ = candidate_sets(world_.association);
  slot_ = 0;
  done_ = false;
  reset_ = true;

  const int users = world_.n_gue();
  arrival_streams_.clear();
  for (int m = 0; m < users; ++m) {
    arrival_streams_.push_back(rng::substream(seeds.dynamics, rng::Stream::arrivals,
                                              static_cast<std::uint64_t>(m)));
  }
  prev_sinr_.clear();
  prev_action_.clear();
  for (int k = 0; k < n_uav(); ++k) {
    prev_sinr_.emplace_back(candidate_count(k), 0.0);
    prev_action_.emplace_back(candidate_count(k), 0);
  }
  prev_short_reward_.assign(static_cast<std::size_t>(n_uav()), 0.0);
  prev_velocity_.assign(static_cast<std::size_t>(cfg_.n_uuav), Velocity{});
  prev_long_reward_.assign(static_cast<std::size_t>(cfg_.n_uuav), 0.0);
  block_rewards_.assign(static_cast<std::size_t>(cfg_.n_uuav), {});

  totals_ = EpisodeTotals{};
  totals_.delivered_per_uav.assign(static_cast<std::size_t>(n_uav()), 0);
  totals_.dropped_per_uav.assign(static_cast<std::size_t>(n_uav()), 0);

  draw_arrivals();
  return observe();
}

void Environment::draw_arrivals() {
  pending_arrivals_ = generate_arrivals(queues_, slot_, cfg_.poisson_rate, arrival_streams_);
  totals_.arrivals += std::accumulate(pending_arrivals_.begin(), pending_arrivals_.end(),
                                      std::int64_t{0});
}

std::vector<double> Environment::short_observation(int uav) const {
  const auto& layout = short_layout(uav);
  std::vector<double> o(layout.size, 0.0);
  const auto features = buffer_features(queues_, uav, slot_);
  std::size_t at = layout.field("buffer").offset;
  for (const auto& t : features) {
    o[at++] = t.backlog;
    o[at++] = t.mean_delay;
    o[at++] = t.head_latency;
  }
  const auto k = static_cast<std::size_t>(uav);
  std::copy(prev_sinr_[k].begin(), prev_sinr_[k].end(),
            o.begin() + static_cast<std::ptrdiff_t>(layout.field("sinr").offset));
  o[layout.field("prev_reward").offset] = prev_short_reward_[k];
  const std::size_t a = layout.field("prev_action").offset;
  for (std::size_t i = 0; i < prev_action_[k].size(); ++i) o[a + i] = prev_action_[k][i];
  return o;
}

std::vector<double> Environment::long_observation(int relay) const {
  const auto& layout = long_layout_;
  std::vector<double> o(layout.size, 0.0);
  const Vec3& pos = world_.uav_pos[static_cast<std::size_t>(relay)];
  const auto users = world_.association.users_of(relay);
  std::size_t at = layout.field("rssi").offset;
  Vec3 centroid;
  for (int m : users) {
    const Vec3& g = world_.gue_pos[static_cast<std::size_t>(m)];
    o[at++] = link_rssi_dbm(relay, pos, g, cfg_);
    centroid.x += g.x;
    centroid.y += g.y;
  }
  if (!users.empty()) {
    centroid.x /= static_cast<double>(users.size());
    centroid.y /= static_cast<double>(users.size());
  }
  const auto r = static_cast<std::size_t>(relay - 1);
  o[layout.field("prev_reward").offset] = prev_long_reward_[r];
  const std::size_t a = layout.field("prev_action").offset;
  o[a] = prev_velocity_[r].vx;
  o[a + 1] = prev_velocity_[r].vy;
  const std::size_t p = layout.field("position").offset;
  o[p] = pos.x;
  o[p + 1] = pos.y;
  o[p + 2] = pos.z;
  const std::size_t c = layout.field("user_centroid").offset;
  o[c] = centroid.x;
  o[c + 1] = centroid.y;
  o[c + 2] = 0.0;
  return o;
}

Observations Environment::observe() const {
  if (!reset_) throw Error(Errc::not_reset, "environment has not been reset");
  Observations obs;
  obs.slot = slot_;
  obs.long_action_due = !done_ && long_action_due();
  for (int k = 0; k < n_uav(); ++k) obs.short_obs.push_back(short_observation(k));
  for (int k = 1; k < n_uav(); ++k) obs.long_obs.push_back(long_observation(k));
  return obs;
}

TransitionRecord Environment::step(const ActionInput& action) {
  if (!reset_) throw Error(Errc::not_reset, "step before reset");
  if (done_) throw Error(Errc::episode_done, "episode is done; reset first");
  const bool due = long_action_due();
  if (due && !action.long_actions) {
    throw Error(Errc::long_action_phase,
                "slot " + std::to_string(slot_) + " starts a block and needs long actions");
  }
  if (!due && action.long_actions) {
    throw Error(Errc::long_action_phase,
                "slot " + std::to_string(slot_) + " is inside a block; long actions not accepted");
  }
  if (action.short_actions.size() != static_cast<std::size_t>(n_uav())) {
    throw Error(Errc::invalid_action, "expected " + std::to_string(n_uav()) + " short actions");
  }
  std::vector<Velocity> velocities;
  if (due) {
    if (action.long_actions->size() != static_cast<std::size_t>(cfg_.n_uuav)) {
      throw Error(Errc::invalid_action,
                  "expected " + std::to_string(cfg_.n_uuav) + " long actions");
    }
    for (const auto& v : *action.long_actions) velocities.push_back(clamp_velocity(v, cfg_.v_d_max));
  }

  TransitionRecord tr;
  StepInfo& info = tr.info;
  info.slot = slot_;
  info.arrivals = std::accumulate(pending_arrivals_.begin(), pending_arrivals_.end(),
                                  std::int64_t{0});

  // Scheduling.
  ScheduleDecision& sched = info.schedule;
  for (int k = 0; k < n_uav(); ++k) {
    const auto elig = eligibility(k);
    sched.mask.push_back(
        sanitize_short_action(action.short_actions[static_cast<std::size_t>(k)], elig, capacity(k)));
  }

  std::vector<std::int64_t> n_cum_before;
  if (record_ledger_) {
    for (int k = 0; k < n_uav(); ++k) {
      for (const auto& t : candidates(k)) n_cum_before.push_back(queues_.backlog(k, t));
    }
  }

  // Channels, precoders and equal power for every scheduled link.
  const auto& ch = cfg_.channel;
  std::vector<CellTransmission> cells(static_cast<std::size_t>(n_uav()));
  std::vector<std::vector<std::size_t>> cand_index(static_cast<std::size_t>(n_uav()));
  const auto rx_key = [&](const LinkTarget& t) {
    return static_cast<std::uint64_t>(t.kind == TargetKind::gue ? t.id : world_.n_gue() + t.id);
  };
  const auto sample_channel = [&](int uav, const LinkTarget& t) {
    auto rng = rng::substream(seeds_.dynamics, rng::Stream::fading,
                              static_cast<std::uint64_t>(slot_), static_cast<std::uint64_t>(uav),
                              rx_key(t));
    const Vec3& tx = world_.uav_pos[static_cast<std::size_t>(uav)];
    if (t.kind == TargetKind::uuav) {
      const auto g = make_geometry(tx, world_.uav_pos[static_cast<std::size_t>(t.id)],
                                   cfg_.carrier_t, cfg_.antennas_t, cfg_.antennas_u);
      return sample_a2a_channel(g, ch, rng);
    }
    const bool donor = uav == kDonor;
    const auto g = make_geometry(tx, world_.gue_pos[static_cast<std::size_t>(t.id)],
                                 donor ? cfg_.carrier_t : cfg_.carrier_u,
                                 donor ? cfg_.antennas_t : cfg_.antennas_u);
    return sample_a2g_channel(g, ch, rng);
  };

  for (int k = 0; k < n_uav(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    CellTransmission& cell = cells[kk];
    cell.uav = k;
    const double power = equal_power_share(
        dbm_to_watt(k == kDonor ? cfg_.power_t_dbm : cfg_.power_u_dbm), sched.count(k));
    for (std::size_t i = 0; i < sched.mask[kk].size(); ++i) {
      if (!sched.mask[kk][i]) continue;
      ScheduledLink l;
      l.target = candidates(k)[i];
      l.channel = sample_channel(k, l.target);
      l.precoder = mrt_precoder(l.channel);
      l.power_w = power;
      cell.links.push_back(std::move(l));
      cand_index[kk].push_back(i);
    }
  }

  // SINR and quantized capacity.
  std::vector<LinkGrant> grants;
  const double noise_t = noise_power_w(ch, cfg_.bandwidth_t);
  const double noise_u = noise_power_w(ch, cfg_.bandwidth_u);
  for (int k = 0; k < n_uav(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    for (std::size_t j = 0; j < cells[kk].links.size(); ++j) {
      const auto& l = cells[kk].links[j];
      double sinr = 0.0;
      if (k == kDonor) {
        sinr = l.target.kind == TargetKind::gue ? sinr_tuav_to_gue(cells[kk], j, noise_t)
                                                : sinr_tuav_to_uuav(cells[kk], j, noise_t);
      } else {
        std::vector<ChannelCoefficient> cross(cells.size());
        for (std::size_t c = 1; c < cells.size(); ++c) {
          if (c == kk || cells[c].links.empty()) continue;
          cross[c] = sample_channel(static_cast<int>(c), l.target);
        }
        const std::span<const CellTransmission> relays(cells.data() + 1, cells.size() - 1);
        sinr = sinr_uuav_to_gue(relays, kk - 1, j,
                                std::span<const ChannelCoefficient>(cross.data() + 1, cross.size() - 1),
                                noise_u);
      }
      const double bw = k == kDonor ? cfg_.bandwidth_t : cfg_.bandwidth_u;
      const auto cap = quantized_capacity(bw, sinr, cfg_.slot_len, cfg_.packet_bits);
      grants.push_back({k, l.target, cap});
      info.links.push_back({k, l.target, sinr, cap, 0});
    }
  }

  // Transmission.
  const TransmitResult tx = transmit(queues_, slot_, grants);
  for (std::size_t i = 0; i < grants.size(); ++i) info.links[i].n_tx = tx.n_tx[i];
  info.delivered = tx.delivered;
  info.delivered_per_uav = tx.delivered_per_uav;
  info.relayed = std::accumulate(tx.relayed_per_gue.begin(), tx.relayed_per_gue.end(),
                                 std::int64_t{0});
  info.max_delivered_age = tx.max_delivered_age;

  // Rewards: user deliveries only.
  tr.short_rewards.assign(static_cast<std::size_t>(n_uav()), 0.0);
  for (int k = 0; k < n_uav(); ++k) {
    tr.short_rewards[static_cast<std::size_t>(k)] =
        static_cast<double>(tx.delivered_per_uav[static_cast<std::size_t>(k)]);
  }
  tr.global_short_reward = std::accumulate(tr.short_rewards.begin(), tr.short_rewards.end(), 0.0);

  // Drop sweep at the boundary into the next slot: anything that would be
  // older than the deadline when next served is removed now.
  const DropResult dropped = drop_expired(queues_, slot_ + 1, cfg_.drop_latency);
  info.dropped = dropped.total;
  info.dropped_per_uav.assign(static_cast<std::size_t>(n_uav()), 0);
  for (int m = 0; m < world_.n_gue(); ++m) {
    const auto mm = static_cast<std::size_t>(m);
    info.dropped_per_uav[0] += dropped.donor_dropped[mm];
    info.dropped_per_uav[static_cast<std::size_t>(world_.association.server[mm])] +=
        dropped.relay_dropped[mm];
  }

  if (record_ledger_) {
    std::size_t at = 0;
    std::size_t grant_at = 0;
    for (int k = 0; k < n_uav(); ++k) {
      const auto& cands = candidates(k);
      for (std::size_t i = 0; i < cands.size(); ++i, ++at) {
        const LinkTarget& t = cands[i];
        LedgerRow row{slot_, k, t, 0, n_cum_before[at], 0, 0};
        if (sched.mask[static_cast<std::size_t>(k)][i]) row.n_tx = tx.n_tx[grant_at++];
        if (t.kind == TargetKind::uuav) {
          for (int m : world_.association.users_of(t.id)) {
            row.n_new += pending_arrivals_[static_cast<std::size_t>(m)];
            row.dropped += dropped.donor_dropped[static_cast<std::size_t>(m)];
          }
        } else if (k == kDonor) {
          row.n_new = pending_arrivals_[static_cast<std::size_t>(t.id)];
          row.dropped = dropped.donor_dropped[static_cast<std::size_t>(t.id)];
        } else {
          row.n_new = tx.relayed_per_gue[static_cast<std::size_t>(t.id)];
          row.dropped = dropped.relay_dropped[static_cast<std::size_t>(t.id)];
        }
        if (row.n_new || row.n_cum || row.n_tx || row.dropped) info.ledger.push_back(row);
      }
    }
  }

  // Mobility.
  world_.slot = slot_ + 1;
  step_gue_mobility(world_, cfg_);
  if (due) {
    step_uuav_motion(world_, velocities, cfg_);
    info.applied_velocities = velocities;
    prev_velocity_ = velocities;
  }

  // Bookkeeping for the next observation.
  for (int k = 0; k < n_uav(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    std::fill(prev_sinr_[kk].begin(), prev_sinr_[kk].end(), 0.0);
    prev_action_[kk] = sched.mask[kk];
    prev_short_reward_[kk] = tr.short_rewards[kk];
  }
  for (const auto& rep : info.links) {
    const auto kk = static_cast<std::size_t>(rep.uav);
    const auto& cands = candidates(rep.uav);
    const auto it = std::find(cands.begin(), cands.end(), rep.target);
    prev_sinr_[kk][static_cast<std::size_t>(it - cands.begin())] = rep.sinr;
  }

  for (int k = 1; k < n_uav(); ++k) {
    block_rewards_[static_cast<std::size_t>(k - 1)].push_back(
        tr.short_rewards[static_cast<std::size_t>(k)]);
  }
  const bool block_end = (slot_ + 1) % cfg_.long_block == 0 || slot_ + 1 == cfg_.episode_len;
  if (block_end) {
    std::vector<double> lr;
    for (auto& b : block_rewards_) {
      lr.push_back(long_reward(b, cfg_.long_block, cfg_.long_reward_mode));
      b.clear();
    }
    tr.global_long_reward = std::accumulate(lr.begin(), lr.end(), 0.0);
    prev_long_reward_ = lr;
    tr.long_rewards = std::move(lr);
  }

  totals_.delivered += info.delivered;
  totals_.dropped += info.dropped;
  for (int k = 0; k < n_uav(); ++k) {
    const auto kk = static_cast<std::size_t>(k);
    totals_.delivered_per_uav[kk] += info.delivered_per_uav[kk];
    totals_.dropped_per_uav[kk] += info.dropped_per_uav[kk];
  }
  totals_.max_delivered_age = std::max(totals_.max_delivered_age, info.max_delivered_age);

  ++slot_;
  if (slot_ >= cfg_.episode_len) {
    done_ = true;
    pending_arrivals_.assign(pending_arrivals_.size(), 0);
  } else {
    draw_arrivals();
  }
  tr.done = done_;
  tr.next = observe();
  return tr;
}

}  // namespace iab
