#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "iab/errors.hpp"
#include "iab/metrics.hpp"
#include "support.hpp"

using namespace iab;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("iab_metrics_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("throughput conversion") {
  const ScenarioConfig c;
  CHECK(packets_to_mbps(200, c) == doctest::Approx(200 * 3e5 / (200 * 0.03) / 1e6));
  CHECK(packets_to_mbps(0, c) == 0.0);
}

TEST_CASE("confidence intervals") {
  CHECK(mean_ci({5.0}).ci95 == 0.0);
  CHECK(mean_ci({5.0}).mean == 5.0);
  const Stat s = mean_ci({1.0, 2.0, 3.0});
  CHECK(s.mean == 2.0);
  CHECK(s.ci95 == doctest::Approx(4.302652729749464 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(mean_ci({}).n == 0);
}

TEST_CASE("convergence detection") {
  CHECK(convergence_episode(std::vector<double>(100, 3.0)) == 1);
  CHECK(convergence_episode(std::vector<double>(40, 0.0)) == 1);
  std::vector<double> ramp;
  for (int e = 1; e <= 300; ++e) ramp.push_back(e < 50 ? 180.0 * e / 50.0 : 180.0);
  const int c = convergence_episode(ramp);
  CHECK(c <= 55);
  CHECK(c >= 45);
  CHECK(convergence_episode({}) == 0);
}

TEST_CASE("runs are reproducible file for file") {
  ScenarioConfig c;
  RunOptions o;
  o.episodes = 10;
  o.seed = 1;
  const fs::path a = scratch("a"), b = scratch("b");
  o.out_dir = a;
  run(c, o);
  o.out_dir = b;
  o.jobs = 3;
  run(c, o);
  for (const char* f : {"episodes.csv", "summary.json"}) CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("slot traces and RSSI dumps") {
  ScenarioConfig c;
  RunOptions o;
  o.episodes = 2;
  o.seed = 4;
  o.out_dir = scratch("trace");
  o.trace_slots = true;
  o.dump_rssi = true;
  const RunResult r = run(c, o);

  std::ifstream f(o.out_dir / "slots.jsonl");
  std::string line;
  std::vector<std::int64_t> delivered(2, 0), dropped(2, 0), arrivals(2, 0);
  std::vector<int> count(2, 0);
  while (std::getline(f, line)) {
    const auto j = nlohmann::json::parse(line);
    const int e = j["episode"];
    ++count[e];
    delivered[e] += j["delivered"].get<std::int64_t>();
    dropped[e] += j["dropped"].get<std::int64_t>();
    arrivals[e] += j["arrivals"].get<std::int64_t>();
  }
  CHECK(count == std::vector<int>{200, 200});
  for (int e = 0; e < 2; ++e) {
    CHECK(r.episodes[e].slot_delivered.size() == 200);
    CHECK(delivered[e] == r.episodes[e].delivered);
    CHECK(dropped[e] == r.episodes[e].dropped);
    CHECK(arrivals[e] == r.episodes[e].arrivals);
  }

  const auto with = read_episodes_csv(o.out_dir / "rssi_with_uuav.csv");
  const auto without = read_episodes_csv(o.out_dir / "rssi_tuav_only.csv");
  CHECK(with.rows.size() == 120);
  CHECK(without.rows.size() == 120);
}

TEST_CASE("summary totals equal the per-UAV sum") {
  ScenarioConfig c = test::small_config();
  RunOptions o;
  o.episodes = 4;
  o.out_dir = scratch("sum");
  const RunResult r = run(c, o);
  const auto& per = r.summary["delivered_packets_per_uav"];
  std::int64_t sum = 0;
  for (const auto& v : per) sum += v.get<std::int64_t>();
  CHECK(sum == r.summary["delivered_packets"].get<std::int64_t>());
  for (const auto& e : r.episodes) {
    CHECK(std::accumulate(e.delivered_per_uav.begin(), e.delivered_per_uav.end(), std::int64_t{0}) == e.delivered);
    CHECK(e.config_hash == config_hash(c));
  }
}

TEST_CASE("summarize across runs") {
  ScenarioConfig c = test::small_config();
  RunOptions o;
  o.episodes = 3;
  o.out_dir = scratch("s1");
  run(c, o);
  const auto one = summarize({o.out_dir / "episodes.csv"});
  CHECK(one["delivered_mbps"]["ci95"] == 0.0);
  CHECK(one["runs"] == 1);
  const fs::path first = o.out_dir / "episodes.csv";
  o.seed = 2;
  o.out_dir = scratch("s2");
  run(c, o);
  const auto two = summarize({first, o.out_dir / "episodes.csv"});
  CHECK(two["runs"] == 2);
  CHECK(two["delivered_mbps_per_uav"].size() == 3);
  CHECK(format_summary(two).find("delivered_mbps") != std::string::npos);
}

TEST_CASE("unwritable output directory is reported") {
  const fs::path blocker = scratch("blocker");
  std::ofstream(blocker) << "x";
  RunOptions o;
  o.out_dir = blocker / "sub";
  CHECK_THROWS_AS(run(test::small_config(), o), Error);
  fs::remove(blocker);
}

}
