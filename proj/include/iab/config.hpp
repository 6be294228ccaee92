#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>

#include <nlohmann/json.hpp>

namespace iab {

enum class LongRewardMode { mean, sum };

/// Propagation and noise constants. Angles inside the Rician exponent are radians.
struct ChannelParams {
  double los_a = 11.95;
  double los_b = 0.136;
  double path_loss_exponent = 2.0;
  double mu_los_db = 1.0;
  double mu_nlos_db = 20.0;
  double rician_a1 = 1.0;
  double rician_a2 = std::log(30.0) / (std::numbers::pi / 2.0);
  double noise_density_dbm_hz = -174.0;
  double noise_figure_db = 7.0;
};

/// Full scenario description. Defaults reproduce the reference deployment
/// (1 tethered donor, 4 relay UAVs, 60 users).
struct ScenarioConfig {
  double area_radius = 500.0;
  int n_uuav = 4;
  int n_gue = 60;
  double tuav_height = 200.0;
  double uuav_height = 100.0;
  double carrier_t = 2.6e9;
  double carrier_u = 700e6;
  double power_t_dbm = 24.0;
  double power_u_dbm = 14.0;
  int antennas_t = 32;
  int antennas_u = 16;
  double bandwidth_t = 100e6;
  double bandwidth_u = 20e6;
  double slot_len = 0.030;
  double poisson_rate = 4.0;
  int drop_latency = 10;
  double packet_bits = 3e5;
  int assoc_t = 20;
  int assoc_u = 10;
  int sched_t = 8;
  int sched_u = 4;
  double v_d_max = 10.0;
  double v_w = 5.0;
  int episode_len = 200;
  int long_block = 10;
  double time_unit = 1.0;
  int candidate_pool = 1000;
  double tuav_zone_radius = 100.0;
  double uuav_zone_offset = 200.0;
  double uuav_zone_radius = 50.0;
  LongRewardMode long_reward_mode = LongRewardMode::mean;
  ChannelParams channel;
  std::uint64_t seed = 1;

  /// Throws Error(invalid_config) naming the first violated invariant.
  void validate() const;
};

ScenarioConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical JSON dump, hex encoded.
std::string config_hash(const ScenarioConfig& cfg);

}  // namespace iab
