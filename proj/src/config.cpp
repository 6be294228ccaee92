#include "iab/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "iab/errors.hpp"

namespace iab {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_config: return "INVALID_CONFIG";
    case Errc::scenario_infeasible: return "SCENARIO_INFEASIBLE";
    case Errc::invalid_action: return "INVALID_ACTION";
    case Errc::long_action_phase: return "LONG_ACTION_PHASE";
    case Errc::not_reset: return "NOT_RESET";
    case Errc::episode_done: return "EPISODE_DONE";
    case Errc::degenerate_channel: return "DEGENERATE_CHANNEL";
    case Errc::domain_error: return "DOMAIN_ERROR";
    case Errc::constraint_violation: return "CONSTRAINT_VIOLATION";
  }
  return "UNKNOWN";
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(Errc::invalid_config, what);
}

// Reads `key` into `field` when present; records the key as consumed.
template <typename T>
void read(const nlohmann::json& j, const char* key, T& field, std::set<std::string>& seen) {
  seen.insert(key);
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    field = it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("bad value for '") + key + "': " + e.what());
  }
}

void reject_unknown(const nlohmann::json& j, const std::set<std::string>& seen,
                    const std::string& section) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!seen.count(it.key())) {
      throw Error(Errc::invalid_config, "unknown config key '" + section + it.key() + "'");
    }
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  require(area_radius > 0, "area_radius must be > 0");
  require(n_uuav >= 0, "n_uuav must be >= 0");
  require(tuav_height > 0 && uuav_height > 0, "heights must be > 0");
  require(carrier_t > 0 && carrier_u > 0, "carrier frequencies must be > 0");
  require(std::isfinite(power_t_dbm) && std::isfinite(power_u_dbm), "powers must be finite");
  require(antennas_t > 0 && antennas_u > 0, "antenna counts must be > 0");
  require(bandwidth_t > 0 && bandwidth_u > 0, "bandwidths must be > 0");
  require(slot_len > 0, "slot_len must be > 0");
  require(poisson_rate >= 0, "poisson_rate must be >= 0");
  require(packet_bits > 0, "packet_bits must be > 0");
  require(assoc_t > 0, "assoc_t must be > 0");
  require(n_uuav == 0 || assoc_u > 0, "assoc_u must be > 0");
  require(n_gue == assoc_t + n_uuav * assoc_u, "n_gue must equal assoc_t + n_uuav * assoc_u");
  require(sched_t > 0 && sched_u > 0, "scheduling limits must be > 0");
  require(sched_t <= assoc_t + n_uuav, "sched_t must be <= assoc_t + n_uuav");
  require(n_uuav == 0 || sched_u <= assoc_u, "sched_u must be <= assoc_u");
  require(drop_latency >= 1, "drop_latency must be >= 1");
  require(long_block >= 1 && episode_len >= long_block, "need episode_len >= long_block >= 1");
  require(v_d_max >= 0 && v_w >= 0, "velocities must be >= 0");
  require(time_unit > 0, "time_unit must be > 0");
  require(candidate_pool >= n_gue, "candidate_pool must be >= n_gue");
  require(tuav_zone_radius > 0 && uuav_zone_radius > 0, "safe-zone radii must be > 0");
  const auto& c = channel;
  require(c.los_a > 0 && c.los_b > 0, "channel.los_a and channel.los_b must be > 0");
  require(c.path_loss_exponent > 0, "channel.path_loss_exponent must be > 0");
  require(c.mu_los_db >= 0 && c.mu_nlos_db >= c.mu_los_db,
          "channel attenuation must satisfy mu_nlos_db >= mu_los_db >= 0");
  require(c.rician_a1 >= 1, "channel.rician_a1 must be >= 1");
}

ScenarioConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(Errc::invalid_config, "config root must be an object");
  ScenarioConfig cfg;
  std::set<std::string> seen;
  read(j, "area_radius", cfg.area_radius, seen);
  read(j, "n_uuav", cfg.n_uuav, seen);
  read(j, "n_gue", cfg.n_gue, seen);
  read(j, "tuav_height", cfg.tuav_height, seen);
  read(j, "uuav_height", cfg.uuav_height, seen);
  read(j, "carrier_t", cfg.carrier_t, seen);
  read(j, "carrier_u", cfg.carrier_u, seen);
  read(j, "power_t_dbm", cfg.power_t_dbm, seen);
  read(j, "power_u_dbm", cfg.power_u_dbm, seen);
  read(j, "antennas_t", cfg.antennas_t, seen);
  read(j, "antennas_u", cfg.antennas_u, seen);
  read(j, "bandwidth_t", cfg.bandwidth_t, seen);
  read(j, "bandwidth_u", cfg.bandwidth_u, seen);
  read(j, "slot_len", cfg.slot_len, seen);
  read(j, "poisson_rate", cfg.poisson_rate, seen);
  read(j, "drop_latency", cfg.drop_latency, seen);
  read(j, "packet_bits", cfg.packet_bits, seen);
  read(j, "assoc_t", cfg.assoc_t, seen);
  read(j, "assoc_u", cfg.assoc_u, seen);
  read(j, "sched_t", cfg.sched_t, seen);
  read(j, "sched_u", cfg.sched_u, seen);
  read(j, "v_d_max", cfg.v_d_max, seen);
  read(j, "v_w", cfg.v_w, seen);
  read(j, "episode_len", cfg.episode_len, seen);
  read(j, "long_block", cfg.long_block, seen);
  read(j, "time_unit", cfg.time_unit, seen);
  read(j, "candidate_pool", cfg.candidate_pool, seen);
  read(j, "tuav_zone_radius", cfg.tuav_zone_radius, seen);
  read(j, "uuav_zone_offset", cfg.uuav_zone_offset, seen);
  read(j, "uuav_zone_radius", cfg.uuav_zone_radius, seen);
  read(j, "seed", cfg.seed, seen);

  std::string mode = "mean";
  read(j, "long_reward_mode", mode, seen);
  if (mode == "mean") {
    cfg.long_reward_mode = LongRewardMode::mean;
  } else if (mode == "sum") {
    cfg.long_reward_mode = LongRewardMode::sum;
  } else {
    throw Error(Errc::invalid_config, "long_reward_mode must be 'mean' or 'sum'");
  }

  seen.insert("channel");
  if (auto it = j.find("channel"); it != j.end()) {
    const auto& c = *it;
    if (!c.is_object()) throw Error(Errc::invalid_config, "'channel' must be an object");
    std::set<std::string> cseen;
    auto& p = cfg.channel;
    read(c, "los_a", p.los_a, cseen);
    read(c, "los_b", p.los_b, cseen);
    read(c, "path_loss_exponent", p.path_loss_exponent, cseen);
    read(c, "mu_los_db", p.mu_los_db, cseen);
    read(c, "mu_nlos_db", p.mu_nlos_db, cseen);
    read(c, "rician_a1", p.rician_a1, cseen);
    read(c, "rician_a2", p.rician_a2, cseen);
    read(c, "noise_density_dbm_hz", p.noise_density_dbm_hz, cseen);
    read(c, "noise_figure_db", p.noise_figure_db, cseen);
    reject_unknown(c, cseen, "channel.");
  }
  reject_unknown(j, seen, "");
  cfg.validate();
  return cfg;
}

nlohmann::json to_json(const ScenarioConfig& cfg) {
  const auto& p = cfg.channel;
  return nlohmann::json{
      {"area_radius", cfg.area_radius},
      {"n_uuav", cfg.n_uuav},
      {"n_gue", cfg.n_gue},
      {"tuav_height", cfg.tuav_height},
      {"uuav_height", cfg.uuav_height},
      {"carrier_t", cfg.carrier_t},
      {"carrier_u", cfg.carrier_u},
      {"power_t_dbm", cfg.power_t_dbm},
      {"power_u_dbm", cfg.power_u_dbm},
      {"antennas_t", cfg.antennas_t},
      {"antennas_u", cfg.antennas_u},
      {"bandwidth_t", cfg.bandwidth_t},
      {"bandwidth_u", cfg.bandwidth_u},
      {"slot_len", cfg.slot_len},
      {"poisson_rate", cfg.poisson_rate},
      {"drop_latency", cfg.drop_latency},
      {"packet_bits", cfg.packet_bits},
      {"assoc_t", cfg.assoc_t},
      {"assoc_u", cfg.assoc_u},
      {"sched_t", cfg.sched_t},
      {"sched_u", cfg.sched_u},
      {"v_d_max", cfg.v_d_max},
      {"v_w", cfg.v_w},
      {"episode_len", cfg.episode_len},
      {"long_block", cfg.long_block},
      {"time_unit", cfg.time_unit},
      {"candidate_pool", cfg.candidate_pool},
      {"tuav_zone_radius", cfg.tuav_zone_radius},
      {"uuav_zone_offset", cfg.uuav_zone_offset},
      {"uuav_zone_radius", cfg.uuav_zone_radius},
      {"long_reward_mode", cfg.long_reward_mode == LongRewardMode::mean ? "mean" : "sum"},
      {"seed", cfg.seed},
      {"channel",
       {{"los_a", p.los_a},
        {"los_b", p.los_b},
        {"path_loss_exponent", p.path_loss_exponent},
        {"mu_los_db", p.mu_los_db},
        {"mu_nlos_db", p.mu_nlos_db},
        {"rician_a1", p.rician_a1},
        {"rician_a2", p.rician_a2},
        {"noise_density_dbm_hz", p.noise_density_dbm_hz},
        {"noise_figure_db", p.noise_figure_db}}},
  };
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::invalid_config, "cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::invalid_config, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ScenarioConfig& cfg) {
  const std::string text = to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

}  // namespace iab
