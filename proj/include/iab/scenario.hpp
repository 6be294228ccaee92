#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iab/config.hpp"
#include "iab/geometry.hpp"
#include "iab/link.hpp"

namespace iab {

struct SafeZone {
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

struct WorldState {
  int slot = 0;
  std::vector<Vec3> uav_pos;       // [0] donor (fixed), [k] relay k
  std::vector<Velocity> uav_vel;   // last applied velocity; [0] always zero
  std::vector<Vec3> gue_pos;
  std::vector<Vec3> gue_origin;
  std::vector<Vec3> gue_dest;
  std::vector<double> gue_bearing;  // radians
  std::vector<SafeZone> safe_zones;  // per UAV group
  AssociationMap association;

  int n_uav() const { return static_cast<int>(uav_pos.size()); }
  int n_gue() const { return static_cast<int>(gue_pos.size()); }
};

/// Initial relay position for relay k (1-based) of n: the edge midpoints of the
/// quadrants for four relays, evenly spread on the boundary otherwise.
Vec3 initial_uuav_position(int k, int n_uuav, const ScenarioConfig& cfg);

/// Safe-zone centre for relay k's user group.
SafeZone uuav_safe_zone(int k, int n_uuav, const ScenarioConfig& cfg);

/// Large-scale RSSI table [uav][point] for ground points at the given UAV positions.
std::vector<std::vector<double>> rssi_table(const std::vector<Vec3>& uav_pos,
                                            const std::vector<Vec3>& ground,
                                            const ScenarioConfig& cfg);

/// RSSI in dBm between one UAV and one ground point.
double link_rssi_dbm(int uav, const Vec3& uav_pos, const Vec3& ground, const ScenarioConfig& cfg);

/// Places UAVs, draws the candidate pool, associates, samples the analysed
/// users per UAV and draws destinations. Draw order: candidate positions,
/// per-UAV user selection, destinations. Users are ordered donor group first,
/// then relay 1, relay 2, ...
/// Throws Error(scenario_infeasible) when a UAV attracts too few candidates.
WorldState init_world(const ScenarioConfig& cfg, std::uint64_t seed);

/// Position of one user at slot n along its straight walk to the destination.
Vec3 gue_position_at(const Vec3& origin, const Vec3& dest, double bearing, int n,
                     const ScenarioConfig& cfg);

/// Moves every user to its position for world.slot.
void step_gue_mobility(WorldState& world, const ScenarioConfig& cfg);

/// Applies one long-block displacement v * (N_l * time_unit) to a relay,
/// projected back onto the disk; altitude unchanged.
Vec3 uuav_displacement(const Vec3& pos, const Velocity& v, const ScenarioConfig& cfg);

/// Moves every relay by its block velocity. velocities[k-1] is relay k.
void step_uuav_motion(WorldState& world, const std::vector<Velocity>& velocities,
                      const ScenarioConfig& cfg);

/// Canonical, byte-comparable serialisation.
std::string serialize(const WorldState& world);

}  // namespace iab
