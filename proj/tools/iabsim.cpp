// iabsim: batch runner, metrics summarizer and environment server.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iab/config.hpp"
#include "iab/errors.hpp"
#include "iab/kernels.hpp"
#include "iab/metrics.hpp"
#include "iab/policies.hpp"
#include "iab/protocol.hpp"

namespace {

iab::ScenarioConfig resolve_config(const std::string& path) {
  return path.empty() ? iab::ScenarioConfig{} : iab::load_config(path);
}

int serve(const iab::ScenarioConfig& cfg, const std::string& endpoint) {
  if (endpoint == "stdio") {
    std::ios::sync_with_stdio(false);
    iab::protocol::serve_stream(cfg, std::cin, std::cout);
    return 0;
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    const int port = std::stoi(endpoint.substr(4));
    iab::protocol::TcpServer server(cfg);
    const int bound = server.start(port);
    std::cerr << "listening on 127.0.0.1:" << bound << std::endl;
    server.wait();
    return 0;
  }
  std::cerr << "unknown endpoint '" << endpoint << "' (expected stdio or tcp:<port>)\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IAB UAV network simulator"};
  app.require_subcommand(1);
  std::string kernels = "auto";
  app.add_option("--kernels", kernels, "auto|scalar|avx2")->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  std::string config_path;
  std::string policy = "roundrobin";
  std::string trajectory = "stationary";
  int episodes = 1;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool trace_slots = false;
  bool dump_rssi = false;
  int jobs = 1;
  std::string serve_endpoint;

  auto* run = app.add_subcommand("run", "run episodes under a baseline policy");
  run->add_option("--config", config_path, "scenario JSON file");
  run->add_option("--policy", policy, "roundrobin|random|greedy");
  run->add_option("--trajectory", trajectory, "stationary|centroid");
  run->add_option("--episodes", episodes)->check(CLI::PositiveNumber);
  run->add_option("--seed", seed);
  run->add_option("--out", out, "output directory");
  run->add_flag("--trace-slots", trace_slots, "write slots.jsonl");
  run->add_flag("--dump-rssi", dump_rssi, "write RSSI samples with and without relays");
  run->add_option("--jobs", jobs, "parallel episode workers")->check(CLI::PositiveNumber);
  run->add_option("--serve", serve_endpoint, "serve the config instead of running (stdio|tcp:<port>)");

  std::vector<std::string> files;
  auto* summ = app.add_subcommand("summarize", "summarize episodes.csv files, one per run");
  summ->add_option("files", files)->required()->check(CLI::ExistingFile);

  std::string endpoint = "stdio";
  auto* srv = app.add_subcommand("serve", "serve environments over the line protocol");
  srv->add_option("--config", config_path, "scenario JSON file");
  srv->add_option("--endpoint", endpoint, "stdio|tcp:<port>");

  CLI11_PARSE(app, argc, argv);

  try {
    iab::kernels::select(kernels);
    if (*summ) {
      const auto s = iab::summarize({files.begin(), files.end()});
      std::cout << iab::format_summary(s);
      return 0;
    }
    const auto cfg = resolve_config(config_path);
    if (*srv) return serve(cfg, endpoint);
    if (!serve_endpoint.empty()) return serve(cfg, serve_endpoint);

    iab::RunOptions opt;
    opt.scheduler = iab::parse_scheduler(policy);
    opt.trajectory = iab::parse_trajectory(trajectory);
    opt.episodes = episodes;
    opt.seed = seed;
    opt.out_dir = out;
    opt.trace_slots = trace_slots;
    opt.dump_rssi = dump_rssi;
    opt.jobs = jobs;
    const auto result = iab::run(cfg, opt);
    std::cout << "policy " << policy << ", trajectory " << trajectory << ", " << episodes
              << " episode(s), kernels " << iab::kernels::name(iab::kernels::active().isa) << "\n"
              << iab::format_summary(result.summary);
    return 0;
  } catch (const iab::Error& e) {
    std::cerr << "error [" << iab::to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
