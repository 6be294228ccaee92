#include "iab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "iab/channel.hpp"
#include "iab/errors.hpp"
#include "iab/rng.hpp"

namespace iab {

namespace {

double relay_angle(int k, int n_uuav) {
  return std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * (k - 1) / n_uuav;
}

Vec3 uniform_in_disk(double cx, double cy, double radius, rng::Engine& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = radius * std::sqrt(u(rng));
  const double theta = 2.0 * std::numbers::pi * u(rng);
  return {cx + r * std::cos(theta), cy + r * std::sin(theta), 0.0};
}

}  // namespace

Vec3 initial_uuav_position(int k, int n_uuav, const ScenarioConfig& cfg) {
  const double a = relay_angle(k, n_uuav);
  return {cfg.area_radius * std::cos(a), cfg.area_radius * std::sin(a), cfg.uuav_height};
}

SafeZone uuav_safe_zone(int k, int n_uuav, const ScenarioConfig& cfg) {
  // The zone sits on the relay's diagonal, offset per axis by uuav_zone_offset.
  const double a = relay_angle(k, n_uuav);
  const double r = cfg.uuav_zone_offset * std::numbers::sqrt2;
  return {r * std::cos(a), r * std::sin(a), cfg.uuav_zone_radius};
}

double link_rssi_dbm(int uav, const Vec3& uav_pos, const Vec3& ground, const ScenarioConfig& cfg) {
  const bool donor = uav == kDonor;
  const auto g = make_geometry(uav_pos, ground, donor ? cfg.carrier_t : cfg.carrier_u,
                               donor ? cfg.antennas_t : cfg.antennas_u);
  return rssi_dbm(donor ? cfg.power_t_dbm : cfg.power_u_dbm, large_scale_a2g(g, cfg.channel));
}

std::vector<std::vector<double>> rssi_table(const std::vector<Vec3>& uav_pos,
                                            const std::vector<Vec3>& ground,
                                            const ScenarioConfig& cfg) {
  std::vector<std::vector<double>> t(uav_pos.size(), std::vector<double>(ground.size()));
  for (std::size_t k = 0; k < uav_pos.size(); ++k) {
    for (std::size_t m = 0; m < ground.size(); ++m) {
      t[k][m] = link_rssi_dbm(static_cast<int>(k), uav_pos[k], ground[m], cfg);
    }
  }
  return t;
}

WorldState init_world(const ScenarioConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  auto rng = rng::substream(seed, rng::Stream::scenario);
  const int n_uav = cfg.n_uuav + 1;

  WorldState w;
  w.uav_pos.push_back({0.0, 0.0, cfg.tuav_height});
  w.safe_zones.push_back({0.0, 0.0, cfg.tuav_zone_radius});
  for (int k = 1; k <= cfg.n_uuav; ++k) {
    w.uav_pos.push_back(initial_uuav_position(k, cfg.n_uuav, cfg));
    w.safe_zones.push_back(uuav_safe_zone(k, cfg.n_uuav, cfg));
  }
  w.uav_vel.assign(static_cast<std::size_t>(n_uav), Velocity{});

  std::vector<Vec3> pool;
  pool.reserve(static_cast<std::size_t>(cfg.candidate_pool));
  for (int i = 0; i < cfg.candidate_pool; ++i) {
    pool.push_back(uniform_in_disk(0.0, 0.0, cfg.area_radius, rng));
  }
  const AssociationMap pool_assoc = associate(rssi_table(w.uav_pos, pool, cfg));

  std::vector<int> selected;
  std::vector<int> server;
  for (int k = 0; k < n_uav; ++k) {
    const std::vector<int> members = pool_assoc.users_of(k);
    const int need = k == kDonor ? cfg.assoc_t : cfg.assoc_u;
    if (static_cast<int>(members.size()) < need) {
      throw Error(Errc::scenario_infeasible,
                  "UAV " + std::to_string(k) + " attracts " + std::to_string(members.size()) +
                      " candidates, needs " + std::to_string(need));
    }
    std::vector<int> chosen;
    std::sample(members.begin(), members.end(), std::back_inserter(chosen), need, rng);
    for (int c : chosen) {
      selected.push_back(c);
      server.push_back(k);
    }
  }

  w.association.n_uav = n_uav;
  w.association.server = server;
  for (std::size_t m = 0; m < selected.size(); ++m) {
    const Vec3 origin = pool[static_cast<std::size_t>(selected[m])];
    const SafeZone& z = w.safe_zones[static_cast<std::size_t>(server[m])];
    const Vec3 dest = uniform_in_disk(z.cx, z.cy, z.radius, rng);
    w.gue_origin.push_back(origin);
    w.gue_pos.push_back(origin);
    w.gue_dest.push_back(dest);
    w.gue_bearing.push_back(std::atan2(dest.y - origin.y, dest.x - origin.x));
  }
  return w;
}

Vec3 gue_position_at(const Vec3& origin, const Vec3& dest, double bearing, int n,
                     const ScenarioConfig& cfg) {
  const double d_max = horizontal_distance(origin, dest);
  const double travelled = cfg.v_w * n * cfg.time_unit;
  if (travelled >= d_max) return dest;
  return {origin.x + travelled * std::cos(bearing), origin.y + travelled * std::sin(bearing), 0.0};
}

void step_gue_mobility(WorldState& world, const ScenarioConfig& cfg) {
  for (std::size_t m = 0; m < world.gue_pos.size(); ++m) {
    world.gue_pos[m] = gue_position_at(world.gue_origin[m], world.gue_dest[m],
                                       world.gue_bearing[m], world.slot, cfg);
  }
}

Vec3 uuav_displacement(const Vec3& pos, const Velocity& v, const ScenarioConfig& cfg) {
  const double block = cfg.long_block * cfg.time_unit;
  double x = pos.x + v.vx * block;
  double y = pos.y + v.vy * block;
  const double r = std::hypot(x, y);
  if (r > cfg.area_radius) {
    x *= cfg.area_radius / r;
    y *= cfg.area_radius / r;
  }
  return {x, y, pos.z};
}

void step_uuav_motion(WorldState& world, const std::vector<Velocity>& velocities,
                      const ScenarioConfig& cfg) {
  for (std::size_t k = 1; k < world.uav_pos.size(); ++k) {
    const Velocity& v = velocities.at(k - 1);
    world.uav_pos[k] = uuav_displacement(world.uav_pos[k], v, cfg);
    world.uav_vel[k] = v;
  }
}

std::string serialize(const WorldState& world) {
  auto vec = [](const Vec3& p) { return nlohmann::json::array({p.x, p.y, p.z}); };
  nlohmann::json j;
  j["slot"] = world.slot;
  for (const auto& p : world.uav_pos) j["uav_pos"].push_back(vec(p));
  for (const auto& v : world.uav_vel) j["uav_vel"].push_back({v.vx, v.vy});
  for (std::size_t m = 0; m < world.gue_pos.size(); ++m) {
    j["gue"].push_back({{"pos", vec(world.gue_pos[m])},
                        {"origin", vec(world.gue_origin[m])},
                        {"dest", vec(world.gue_dest[m])},
                        {"bearing", world.gue_bearing[m]},
                        {"server", world.association.server[m]}});
  }
  for (const auto& z : world.safe_zones) j["safe_zones"].push_back({z.cx, z.cy, z.radius});
  return j.dump();
}

}  // namespace iab
