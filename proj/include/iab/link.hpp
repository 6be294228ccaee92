#pragma once

// User association, MRT precoding, equal power split, the three downlink SINR
// regimes and quantized per-slot capacity.

#include <cstdint>
#include <span>
#include <vector>

#include "iab/channel.hpp"

namespace iab {

/// UAV index 0 is the tethered donor; 1..K are the relay UAVs.
inline constexpr int kDonor = 0;

struct AssociationMap {
  std::vector<int> server;  // per G-UE: serving UAV index
  int n_uav = 1;

  std::vector<int> users_of(int uav) const;
};

/// rssi[uav][gue] in dBm. Each user goes to its argmax, ties to the lowest UAV index.
AssociationMap associate(const std::vector<std::vector<double>>& rssi);

enum class TargetKind { gue, uuav };

struct LinkTarget {
  TargetKind kind = TargetKind::gue;
  int id = 0;  // G-UE index or UAV index

  friend bool operator==(const LinkTarget&, const LinkTarget&) = default;
};

/// Scheduling candidates per UAV: the donor lists relays 1..K then its own
/// users; a relay lists its users. Indices into these lists are what actions address.
std::vector<std::vector<LinkTarget>> candidate_sets(const AssociationMap& assoc);

/// Per-UAV binary masks over candidate_sets().
struct ScheduleDecision {
  std::vector<std::vector<std::uint8_t>> mask;

  std::size_t count(int uav) const;
};

/// MISO: g^H / ||g||. MIMO: principal right singular vector of g.
/// Throws Error(degenerate_channel) for an all-zero channel.
CVector mrt_precoder(const ChannelCoefficient& g);

/// ||g w||^2 (for a 1 x A channel this is |g w|^2).
double received_gain(const ChannelCoefficient& g, std::span<const cplx> w);

/// total / n for each of the n scheduled links.
double equal_power_share(double total_w, std::size_t n_scheduled);

struct ScheduledLink {
  LinkTarget target;
  ChannelCoefficient channel;  // transmitter -> this target
  CVector precoder;
  double power_w = 0.0;
};

/// Everything one UAV transmits in a slot.
struct CellTransmission {
  int uav = 0;
  std::vector<ScheduledLink> links;
};

/// Donor -> user SINR. Interference from the donor's other scheduled users
/// and relay beams, weighted by the victim's allocated power.
double sinr_tuav_to_gue(const CellTransmission& donor, std::size_t victim, double noise_w);

/// Donor -> relay SINR (MIMO). Interference from other relay beams and user beams.
double sinr_tuav_to_uuav(const CellTransmission& donor, std::size_t victim, double noise_w);

/// Relay -> user SINR. `cross[c]` is the channel from cells[c]'s UAV to the
/// victim user; the entry for the victim's own cell is ignored. Cells with no
/// scheduled links contribute nothing.
double sinr_uuav_to_gue(std::span<const CellTransmission> cells, std::size_t cell,
                        std::size_t victim, std::span<const ChannelCoefficient> cross,
                        double noise_w);

/// floor(B log2(1 + sinr) T / N_p).
std::int64_t quantized_capacity(double bandwidth_hz, double sinr, double slot_s,
                                double packet_bits);

}  // namespace iab
