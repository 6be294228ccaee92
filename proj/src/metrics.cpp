#include "iab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "iab/errors.hpp"

namespace iab {

using nlohmann::json;

double packets_to_mbps(std::int64_t packets, const ScenarioConfig& cfg) {
  return static_cast<double>(packets) * cfg.packet_bits / (cfg.episode_len * cfg.slot_len) / 1e6;
}

EpisodeSeeds episode_seeds(std::uint64_t run_seed, int episode) {
  return {run_seed,
          rng::mix(run_seed, {static_cast<std::uint64_t>(rng::Stream::episode),
                              static_cast<std::uint64_t>(episode)})};
}

json slot_record(int episode, const TransitionRecord& tr) {
  const StepInfo& i = tr.info;
  json ledger = json::array();
  for (const auto& r : i.ledger) {
    ledger.push_back({r.slot, link_name(r.uav, r.target), r.n_new, r.n_cum, r.n_tx, r.dropped});
  }
  return {{"episode", episode},
          {"slot", i.slot},
          {"arrivals", i.arrivals},
          {"delivered", i.delivered},
          {"relayed", i.relayed},
          {"dropped", i.dropped},
          {"delivered_per_uav", i.delivered_per_uav},
          {"dropped_per_uav", i.dropped_per_uav},
          {"reward", tr.global_short_reward},
          {"ledger", ledger}};
}

EpisodeMetrics run_episode(Environment& env, SchedulerKind scheduler, TrajectoryKind trajectory,
                           EpisodeSeeds seeds, int episode, std::ostream* trace) {
  const ScenarioConfig& cfg = env.config();
  env.record_ledger(trace != nullptr);
  Observations obs = env.reset(seeds);
  BaselinePolicy policy(env, scheduler, trajectory, seeds.dynamics);

  EpisodeMetrics m;
  m.episode = episode;
  m.seeds = seeds;
  m.config_hash = config_hash(cfg);
  while (!env.done()) {
    const TransitionRecord tr = env.step(policy.act(obs));
    m.slot_delivered.push_back(tr.info.delivered);
    m.slot_dropped.push_back(tr.info.dropped);
    if (trace) *trace << slot_record(episode, tr).dump() << '\n';
    obs = tr.next;
  }
  const EpisodeTotals& t = env.totals();
  m.arrivals = t.arrivals;
  m.delivered = t.delivered;
  m.dropped = t.dropped;
  m.residual = env.queues().total_queued();
  m.max_delivered_age = t.max_delivered_age;
  m.delivered_per_uav = t.delivered_per_uav;
  m.dropped_per_uav = t.dropped_per_uav;
  m.delivered_mbps = packets_to_mbps(m.delivered, cfg);
  m.dropped_mbps = packets_to_mbps(m.dropped, cfg);
  for (auto p : m.delivered_per_uav) m.delivered_mbps_per_uav.push_back(packets_to_mbps(p, cfg));
  for (auto p : m.dropped_per_uav) m.dropped_mbps_per_uav.push_back(packets_to_mbps(p, cfg));
  return m;
}

RssiSamples rssi_samples(const WorldState& world, const ScenarioConfig& cfg) {
  const auto table = rssi_table(world.uav_pos, world.gue_pos, cfg);
  RssiSamples s;
  for (int m = 0; m < world.n_gue(); ++m) {
    double best = table[0][static_cast<std::size_t>(m)];
    for (const auto& row : table) best = std::max(best, row[static_cast<std::size_t>(m)]);
    s.with_uuav.push_back(best);
    s.tuav_only.push_back(table[0][static_cast<std::size_t>(m)]);
  }
  return s;
}

Stat mean_ci(const std::vector<double>& xs) {
  Stat s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  const boost::math::students_t dist(static_cast<double>(s.n - 1));
  s.ci95 = boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(s.n));
  return s;
}

int convergence_episode(const std::vector<double>& series) {
  if (series.empty()) return 0;
  const std::size_t tail = std::max<std::size_t>(1, series.size() / 10);
  const double terminal =
      std::accumulate(series.end() - static_cast<std::ptrdiff_t>(tail), series.end(), 0.0) /
      static_cast<double>(tail);
  const double threshold = terminal - 0.05 * std::abs(terminal);
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i] >= threshold) return static_cast<int>(i + 1);
  }
  return static_cast<int>(series.size());
}

std::string episodes_csv_header(int n_uav) {
  std::ostringstream os;
  os << "episode,scenario_seed,dynamics_seed,config_hash,arrivals,delivered,dropped,residual,"
        "max_delivered_age,delivered_mbps,dropped_mbps";
  for (int k = 0; k < n_uav; ++k) os << ",delivered_uav" << k;
  for (int k = 0; k < n_uav; ++k) os << ",dropped_uav" << k;
  for (int k = 0; k < n_uav; ++k) os << ",delivered_mbps_uav" << k;
  return os.str();
}

std::string episodes_csv_row(const EpisodeMetrics& m) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << m.episode << ',' << m.seeds.scenario << ',' << m.seeds.dynamics << ',' << m.config_hash
     << ',' << m.arrivals << ',' << m.delivered << ',' << m.dropped << ',' << m.residual << ','
     << m.max_delivered_age << ',' << m.delivered_mbps << ',' << m.dropped_mbps;
  for (auto v : m.delivered_per_uav) os << ',' << v;
  for (auto v : m.dropped_per_uav) os << ',' << v;
  for (auto v : m.delivered_mbps_per_uav) os << ',' << v;
  return os.str();
}

namespace {

json stat_json(const Stat& s) { return {{"mean", s.mean}, {"ci95", s.ci95}, {"n", s.n}}; }

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::invalid_config, "cannot write " + path.string());
  f << content;
  if (!f) throw Error(Errc::invalid_config, "write failed for " + path.string());
}

}  // namespace

json summarize_episodes(const std::vector<EpisodeMetrics>& eps) {
  json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["episodes"] = eps.size();
  if (eps.empty()) return j;
  const std::size_t n_uav = eps.front().delivered_per_uav.size();
  std::vector<double> total, dropped;
  std::vector<std::vector<double>> per(n_uav);
  std::int64_t packets = 0;
  std::vector<std::int64_t> packets_per(n_uav, 0);
  for (const auto& e : eps) {
    total.push_back(e.delivered_mbps);
    dropped.push_back(e.dropped_mbps);
    packets += e.delivered;
    for (std::size_t k = 0; k < n_uav; ++k) {
      per[k].push_back(e.delivered_mbps_per_uav[k]);
      packets_per[k] += e.delivered_per_uav[k];
    }
  }
  j["delivered_mbps"] = stat_json(mean_ci(total));
  j["dropped_mbps"] = stat_json(mean_ci(dropped));
  json pu = json::array();
  for (const auto& v : per) pu.push_back(stat_json(mean_ci(v)));
  j["delivered_mbps_per_uav"] = pu;
  j["delivered_packets"] = packets;
  j["delivered_packets_per_uav"] = packets_per;
  j["config_hash"] = eps.front().config_hash;
  j["convergence_episode"] = convergence_episode(total);
  return j;
}

RunResult run(const ScenarioConfig& cfg, const RunOptions& opt) {
  if (opt.episodes < 1) throw Error(Errc::invalid_config, "episodes must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(opt.out_dir, ec);
  if (ec || !std::filesystem::is_directory(opt.out_dir)) {
    throw Error(Errc::invalid_config, "cannot create output directory " + opt.out_dir.string());
  }

  const auto n = static_cast<std::size_t>(opt.episodes);
  std::vector<EpisodeMetrics> eps(n);
  std::vector<std::string> traces(n);
  std::vector<RssiSamples> rssi(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t begin, std::size_t stride) {
    Environment env(cfg);
    for (std::size_t e = begin; e < n; e += stride) {
      try {
        std::ostringstream trace;
        eps[e] = run_episode(env, opt.scheduler, opt.trajectory,
                             episode_seeds(opt.seed, static_cast<int>(e)), static_cast<int>(e),
                             opt.trace_slots ? &trace : nullptr);
        traces[e] = trace.str();
        if (opt.dump_rssi) {
          rssi[e] = rssi_samples(init_world(cfg, eps[e].seeds.scenario), cfg);
        }
      } catch (...) {
        errors[e] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(opt.jobs, 1)), 1, n);
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(work, j, jobs);
  work(0, jobs);
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::ostringstream csv;
  csv << episodes_csv_header(cfg.n_uuav + 1) << '\n';
  for (const auto& m : eps) csv << episodes_csv_row(m) << '\n';
  write_file(opt.out_dir / "episodes.csv", csv.str());

  if (opt.trace_slots) {
    std::string all;
    for (const auto& t : traces) all += t;
    write_file(opt.out_dir / "slots.jsonl", all);
  }
  if (opt.dump_rssi) {
    std::ostringstream with, without;
    with << std::setprecision(17) << "episode,gue,rssi_dbm\n";
    without << std::setprecision(17) << "episode,gue,rssi_dbm\n";
    for (std::size_t e = 0; e < n; ++e) {
      for (std::size_t m = 0; m < rssi[e].with_uuav.size(); ++m) {
        with << e << ',' << m << ',' << rssi[e].with_uuav[m] << '\n';
        without << e << ',' << m << ',' << rssi[e].tuav_only[m] << '\n';
      }
    }
    write_file(opt.out_dir / "rssi_with_uuav.csv", with.str());
    write_file(opt.out_dir / "rssi_tuav_only.csv", without.str());
  }

  RunResult r;
  r.summary = summarize_episodes(eps);
  r.summary["policy"] = std::string(to_string(opt.scheduler));
  r.summary["trajectory"] = std::string(to_string(opt.trajectory));
  r.summary["seed"] = opt.seed;
  r.summary["config"] = to_json(cfg);
  write_file(opt.out_dir / "summary.json", r.summary.dump(2) + "\n");
  r.episodes = std::move(eps);
  return r;
}

std::vector<double> EpisodeTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(Errc::invalid_config, "no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - columns.begin());
  std::vector<double> v;
  for (const auto& r : rows) v.push_back(std::stod(r.at(c)));
  return v;
}

EpisodeTable read_episodes_csv(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::invalid_config, "cannot read " + path.string());
  EpisodeTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(f, line)) throw Error(Errc::invalid_config, path.string() + " is empty");
  t.columns = split(line);
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.columns.size()) {
      throw Error(Errc::invalid_config, path.string() + ": ragged row");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

json summarize(const std::vector<std::filesystem::path>& files) {
  if (files.empty()) throw Error(Errc::invalid_config, "no metrics files given");
  std::vector<EpisodeTable> tables;
  for (const auto& f : files) tables.push_back(read_episodes_csv(f));

  std::vector<std::string> uav_cols;
  for (const auto& c : tables.front().columns) {
    if (c.rfind("delivered_mbps_uav", 0) == 0) uav_cols.push_back(c);
  }
  const auto mean_of = [](const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  };

  std::vector<double> total;
  std::vector<std::vector<double>> per(uav_cols.size());
  std::size_t longest = 0;
  for (const auto& t : tables) {
    total.push_back(mean_of(t.column("delivered_mbps")));
    for (std::size_t k = 0; k < uav_cols.size(); ++k) per[k].push_back(mean_of(t.column(uav_cols[k])));
    longest = std::max(longest, t.rows.size());
  }
  std::vector<double> curve(longest, 0.0);
  std::vector<int> counts(longest, 0);
  for (const auto& t : tables) {
    const auto v = t.column("delivered_mbps");
    for (std::size_t i = 0; i < v.size(); ++i) {
      curve[i] += v[i];
      ++counts[i];
    }
  }
  for (std::size_t i = 0; i < longest; ++i) curve[i] /= counts[i];

  json j;
  j["schema_version"] = kMetricsSchemaVersion;
  j["runs"] = files.size();
  j["delivered_mbps"] = stat_json(mean_ci(total));
  json pu = json::array();
  for (const auto& v : per) pu.push_back(stat_json(mean_ci(v)));
  j["delivered_mbps_per_uav"] = pu;
  j["convergence_episode"] = convergence_episode(curve);
  return j;
}

std::string format_summary(const json& s) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  const auto line = [&](const std::string& name, const json& st) {
    os << std::left << std::setw(22) << name << std::right << std::setw(12)
       << st.at("mean").get<double>() << " +- " << st.at("ci95").get<double>() << "  (n="
       << st.at("n").get<std::size_t>() << ")\n";
  };
  line("delivered_mbps", s.at("delivered_mbps"));
  if (s.contains("dropped_mbps")) line("dropped_mbps", s.at("dropped_mbps"));
  const auto& pu = s.at("delivered_mbps_per_uav");
  for (std::size_t k = 0; k < pu.size(); ++k) {
    line(std::string("  ") + (k == 0 ? "T0" : "U" + std::to_string(k)), pu[k]);
  }
  os << "convergence_episode   " << s.at("convergence_episode").get<int>() << "\n";
  return os.str();
}

}  // namespace iab
