#pragma once

// Two-hop FIFO traffic: the donor holds one queue per user (relay users'
// queues together form the donor->relay aggregate view), each relay holds one
// queue per served user. Packet age is end to end.

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "iab/link.hpp"
#include "iab/rng.hpp"

namespace iab {

struct Packet {
  int gue = 0;
  int birth = 0;  // slot the packet arrived at the donor
};

using PacketQueue = std::deque<Packet>;

/// (N_cum, mean queueing delay, head-of-line latency) for one queue.
struct BufferTriple {
  double backlog = 0.0;
  double mean_delay = 0.0;
  double head_latency = 0.0;

  friend bool operator==(const BufferTriple&, const BufferTriple&) = default;
};

class QueueState {
 public:
  QueueState() = default;
  explicit QueueState(AssociationMap assoc);

  const AssociationMap& association() const { return assoc_; }
  int n_gue() const { return static_cast<int>(donor_.size()); }

  PacketQueue& donor_queue(int gue) { return donor_.at(static_cast<std::size_t>(gue)); }
  const PacketQueue& donor_queue(int gue) const { return donor_.at(static_cast<std::size_t>(gue)); }
  PacketQueue& relay_queue(int gue) { return relay_.at(static_cast<std::size_t>(gue)); }
  const PacketQueue& relay_queue(int gue) const { return relay_.at(static_cast<std::size_t>(gue)); }

  /// N_cum for transmitter `uav` toward `target` (donor->relay sums the relay's users).
  std::int64_t backlog(int uav, const LinkTarget& target) const;

  /// Non-empty buffer indicator.
  bool eligible(int uav, const LinkTarget& target) const { return backlog(uav, target) > 0; }

  std::int64_t total_queued() const;

 private:
  AssociationMap assoc_;
  std::vector<PacketQueue> donor_;
  std::vector<PacketQueue> relay_;
};

/// Draws N_new ~ Poisson(lambda) per user from its own stream and enqueues at
/// the donor with birth = slot. streams[m] belongs to user m.
std::vector<std::int64_t> generate_arrivals(QueueState& q, int slot, double lambda,
                                            std::span<rng::Engine> streams);

/// One link's capacity grant for this slot.
struct LinkGrant {
  int uav = 0;
  LinkTarget target;
  std::int64_t capacity = 0;
};

struct TransmitResult {
  std::vector<std::int64_t> n_tx;                // per grant
  std::vector<std::int64_t> delivered_per_uav;   // user deliveries per transmitter
  std::vector<std::int64_t> relayed_per_gue;     // donor->relay moves per user
  std::int64_t delivered = 0;
  int max_delivered_age = -1;
};

/// Serves every grant. Relay->user pops use the pre-slot relay queues, so
/// packets moved over the backhaul in this slot are forwarded from the next
/// slot on. Throws Error(constraint_violation) for a grant on an empty buffer.
TransmitResult transmit(QueueState& q, int slot, std::span<const LinkGrant> grants);

/// One user's queue as seen by the backhaul split.
struct QueueSummary {
  std::int64_t packets = 0;
  int head_age = 0;
};

/// Splits a backhaul budget over users: users sorted by descending head-of-line
/// age (ties to the lower index), one packet per user per round, exhausted
/// users skipped, until the budget is met or all queues are empty.
std::vector<std::int64_t> distribute_a2a(std::span<const QueueSummary> queues,
                                         std::int64_t budget);

struct DropResult {
  std::vector<std::int64_t> donor_dropped;  // per user, from donor queues
  std::vector<std::int64_t> relay_dropped;  // per user, from relay queues
  std::int64_t total = 0;
};

/// Removes every packet with age = slot - birth > n_con.
DropResult drop_expired(QueueState& q, int slot, int n_con);

BufferTriple queue_triple(const PacketQueue& queue, int slot);

/// Aggregate triple over several queues (the donor's per-relay view).
BufferTriple merged_triple(std::span<const PacketQueue* const> queues, int slot);

/// Flat features for one UAV in candidate order: donor emits relay triples
/// then its own users' triples; a relay emits its users' triples.
std::vector<BufferTriple> buffer_features(const QueueState& q, int uav, int slot);

/// One traffic-ledger row.
struct LedgerRow {
  int slot = 0;
  int uav = 0;
  LinkTarget target;
  std::int64_t n_new = 0;
  std::int64_t n_cum = 0;
  std::int64_t n_tx = 0;
  std::int64_t dropped = 0;
};

std::string link_name(int uav, const LinkTarget& target);

}  // namespace iab
