#include "iab/traffic.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "iab/errors.hpp"

namespace iab {

QueueState::QueueState(AssociationMap assoc)
    : assoc_(std::move(assoc)), donor_(assoc_.server.size()), relay_(assoc_.server.size()) {}

std::int64_t QueueState::backlog(int uav, const LinkTarget& target) const {
  if (target.kind == TargetKind::uuav) {
    if (uav != kDonor) throw Error(Errc::domain_error, "only the donor serves relay links");
    std::int64_t n = 0;
    for (std::size_t m = 0; m < donor_.size(); ++m) {
      if (assoc_.server[m] == target.id) n += static_cast<std::int64_t>(donor_[m].size());
    }
    return n;
  }
  const auto& q = uav == kDonor ? donor_queue(target.id) : relay_queue(target.id);
  return static_cast<std::int64_t>(q.size());
}

std::int64_t QueueState::total_queued() const {
  std::int64_t n = 0;
  for (const auto& q : donor_) n += static_cast<std::int64_t>(q.size());
  for (const auto& q : relay_) n += static_cast<std::int64_t>(q.size());
  return n;
}

std::vector<std::int64_t> generate_arrivals(QueueState& q, int slot, double lambda,
                                            std::span<rng::Engine> streams) {
  std::vector<std::int64_t> n_new(static_cast<std::size_t>(q.n_gue()), 0);
  if (lambda <= 0.0) return n_new;
  std::poisson_distribution<std::int64_t> poisson(lambda);
  for (int m = 0; m < q.n_gue(); ++m) {
    const std::int64_t k = poisson(streams[static_cast<std::size_t>(m)]);
    n_new[static_cast<std::size_t>(m)] = k;
    auto& queue = q.donor_queue(m);
    for (std::int64_t i = 0; i < k; ++i) queue.push_back({m, slot});
  }
  return n_new;
}

std::vector<std::int64_t> distribute_a2a(std::span<const QueueSummary> queues,
                                         std::int64_t budget) {
  std::vector<std::int64_t> alloc(queues.size(), 0);
  std::vector<std::size_t> order(queues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return queues[a].head_age > queues[b].head_age;
  });
  std::int64_t remaining = budget;
  bool progressed = true;
  while (remaining > 0 && progressed) {
    progressed = false;
    for (std::size_t idx : order) {
      if (remaining == 0) break;
      if (alloc[idx] < queues[idx].packets) {
        ++alloc[idx];
        --remaining;
        progressed = true;
      }
    }
  }
  return alloc;
}

TransmitResult transmit(QueueState& q, int slot, std::span<const LinkGrant> grants) {
  const auto& assoc = q.association();
  TransmitResult r;
  r.n_tx.assign(grants.size(), 0);
  r.delivered_per_uav.assign(static_cast<std::size_t>(assoc.n_uav), 0);
  r.relayed_per_gue.assign(static_cast<std::size_t>(q.n_gue()), 0);

  auto check_nonempty = [&](const LinkGrant& g) {
    if (q.backlog(g.uav, g.target) == 0) {
      throw Error(Errc::constraint_violation,
                  "scheduled link " + link_name(g.uav, g.target) + " has an empty buffer");
    }
  };
  for (const auto& g : grants) check_nonempty(g);

  // User deliveries first, then backhaul moves.
  for (std::size_t i = 0; i < grants.size(); ++i) {
    const LinkGrant& g = grants[i];
    if (g.target.kind != TargetKind::gue) continue;
    auto& queue = g.uav == kDonor ? q.donor_queue(g.target.id) : q.relay_queue(g.target.id);
    const std::int64_t n =
        std::min<std::int64_t>(std::max<std::int64_t>(g.capacity, 0),
                               static_cast<std::int64_t>(queue.size()));
    for (std::int64_t k = 0; k < n; ++k) {
      r.max_delivered_age = std::max(r.max_delivered_age, slot - queue.front().birth);
      queue.pop_front();
    }
    r.n_tx[i] = n;
    r.delivered_per_uav[static_cast<std::size_t>(g.uav)] += n;
    r.delivered += n;
  }

  for (std::size_t i = 0; i < grants.size(); ++i) {
    const LinkGrant& g = grants[i];
    if (g.target.kind != TargetKind::uuav) continue;
    const std::vector<int> users = assoc.users_of(g.target.id);
    std::vector<QueueSummary> summary;
    std::int64_t backlog = 0;
    for (int m : users) {
      const auto& queue = q.donor_queue(m);
      summary.push_back({static_cast<std::int64_t>(queue.size()),
                         queue.empty() ? 0 : slot - queue.front().birth});
      backlog += static_cast<std::int64_t>(queue.size());
    }
    const std::int64_t budget = std::min(std::max<std::int64_t>(g.capacity, 0), backlog);
    const auto alloc = distribute_a2a(summary, budget);
    for (std::size_t u = 0; u < users.size(); ++u) {
      const int m = users[u];
      auto& from = q.donor_queue(m);
      auto& to = q.relay_queue(m);
      for (std::int64_t k = 0; k < alloc[u]; ++k) {
        to.push_back(from.front());
        from.pop_front();
      }
      r.relayed_per_gue[static_cast<std::size_t>(m)] += alloc[u];
    }
    r.n_tx[i] = budget;
  }
  return r;
}

DropResult drop_expired(QueueState& q, int slot, int n_con) {
  DropResult d;
  d.donor_dropped.assign(static_cast<std::size_t>(q.n_gue()), 0);
  d.relay_dropped.assign(static_cast<std::size_t>(q.n_gue()), 0);
  auto sweep = [&](PacketQueue& queue) {
    std::int64_t n = 0;
    // FIFO order means expired packets sit at the front.
    while (!queue.empty() && slot - queue.front().birth > n_con) {
      queue.pop_front();
      ++n;
    }
    return n;
  };
  for (int m = 0; m < q.n_gue(); ++m) {
    d.donor_dropped[static_cast<std::size_t>(m)] = sweep(q.donor_queue(m));
    d.relay_dropped[static_cast<std::size_t>(m)] = sweep(q.relay_queue(m));
    d.total += d.donor_dropped[static_cast<std::size_t>(m)] +
               d.relay_dropped[static_cast<std::size_t>(m)];
  }
  return d;
}

BufferTriple queue_triple(const PacketQueue& queue, int slot) {
  const PacketQueue* one = &queue;
  return merged_triple({&one, 1}, slot);
}

BufferTriple merged_triple(std::span<const PacketQueue* const> queues, int slot) {
  BufferTriple t;
  double age_sum = 0.0;
  for (const PacketQueue* queue : queues) {
    for (const Packet& p : *queue) {
      const double age = slot - p.birth;
      age_sum += age;
      t.head_latency = std::max(t.head_latency, age);
    }
    t.backlog += static_cast<double>(queue->size());
  }
  if (t.backlog > 0) t.mean_delay = age_sum / t.backlog;
  return t;
}

std::vector<BufferTriple> buffer_features(const QueueState& q, int uav, int slot) {
  const auto& assoc = q.association();
  std::vector<BufferTriple> out;
  if (uav == kDonor) {
    for (int k = 1; k < assoc.n_uav; ++k) {
      std::vector<const PacketQueue*> view;
      for (int m : assoc.users_of(k)) view.push_back(&q.donor_queue(m));
      out.push_back(merged_triple(view, slot));
    }
  }
  for (int m : assoc.users_of(uav)) {
    out.push_back(queue_triple(uav == kDonor ? q.donor_queue(m) : q.relay_queue(m), slot));
  }
  return out;
}

std::string link_name(int uav, const LinkTarget& target) {
  const std::string tx = uav == kDonor ? "T0" : "U" + std::to_string(uav);
  const std::string rx = (target.kind == TargetKind::gue ? "G" : "U") + std::to_string(target.id);
  return tx + "->" + rx;
}

}  // namespace iab
