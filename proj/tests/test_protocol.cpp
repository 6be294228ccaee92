#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <random>
#include <sstream>

#include "iab/protocol.hpp"
#include "support.hpp"

using namespace iab;
using nlohmann::json;

namespace {

json call(protocol::Session& s, const json& req) { return json::parse(s.handle_line(req.dump())); }

// Builds a score action with one score per candidate.
json score_step(const json& candidates, bool long_due, int n_long, int id, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  json shorts = json::array();
  for (const auto& c : candidates) {
    json s = json::array();
    for (std::size_t i = 0; i < c.size(); ++i) s.push_back(u(rng));
    shorts.push_back({{"scores", s}});
  }
  json req = {{"type", "step"}, {"id", id}, {"short", shorts}};
  if (long_due) {
    json l = json::array();
    for (int k = 0; k < n_long; ++k) l.push_back({u(rng) * 20, u(rng) * 20});
    req["long"] = l;
  }
  return req;
}

std::vector<std::string> transcript(std::uint64_t seed, int steps) {
  protocol::Session s(test::small_config());
  std::vector<std::string> out;
  out.push_back(s.handle_line(json{{"type", "hello"}, {"id", 0}}.dump()));
  const std::string reset = s.handle_line(json{{"type", "reset"}, {"id", 1}, {"seed", seed}}.dump());
  out.push_back(reset);
  const json cands = json::parse(reset).at("candidates");
  std::mt19937_64 rng(seed);
  json last = json::parse(reset);
  for (int i = 0; i < steps; ++i) {
    const bool due = last.at("obs").at("long_action_due").get<bool>();
    out.push_back(s.handle_line(score_step(cands, due, 2, 2 + i, rng).dump()));
    last = json::parse(out.back());
  }
  return out;
}

}  // namespace

TEST_SUITE("protocol") {

TEST_CASE("hello advertises agents and layouts") {
  protocol::Session s(ScenarioConfig{});
  const json h = call(s, {{"type", "hello"}, {"id", "a"}});
  CHECK(h["type"] == "hello");
  CHECK(h["id"] == "a");
  CHECK(h["protocol_version"] == protocol::kVersion);
  CHECK(h["short_agents"].size() == 5);
  CHECK(h["long_agents"].size() == 4);
  CHECK(h["long_block"] == 10);
  CHECK(h["episode_len"] == 200);
  CHECK(h["short_agents"][0]["candidates"] == 24);
  CHECK(h["short_agents"][0]["capacity"] == 8);
  CHECK(h["short_agents"][1]["observation"]["size"] == 3 * 10 + 10 + 1 + 10);
}

TEST_CASE("reset twice gives identical observations") {
  protocol::Session s(ScenarioConfig{});
  const json a = call(s, {{"type", "reset"}, {"id", 1}, {"seed", 7}});
  const json b = call(s, {{"type", "reset"}, {"id", 1}, {"seed", 7}});
  CHECK(a.dump() == b.dump());
  CHECK(a["type"] == "obs");
}

TEST_CASE("error codes keep the session alive") {
  protocol::Session s(test::small_config());
  CHECK(call(s, {{"type", "step"}, {"id", 1}, {"short", json::array()}})["code"] == "NOT_RESET");
  CHECK(json::parse(s.handle_line("{not json"))["code"] == "MALFORMED");
  CHECK(json::parse(s.handle_line("[1,2]"))["code"] == "MALFORMED");
  CHECK(call(s, {{"type", "dance"}, {"id", 2}})["code"] == "UNKNOWN_TYPE");
  CHECK(call(s, {{"type", "reset"}, {"id", 3}})["code"] == "MALFORMED");
  CHECK(call(s, {{"type", "reset"}, {"id", 3}, {"seed", -1}})["code"] == "MALFORMED");
  const json r = call(s, {{"type", "reset"}, {"id", 4}, {"seed", 1}, {"future_field", true}});
  CHECK(r["type"] == "obs");
  const json cands = r["candidates"];
  std::mt19937_64 rng(1);
  json no_long = score_step(cands, false, 2, 5, rng);
  CHECK(call(s, no_long)["code"] == "LONG_ACTION_PHASE");
  json bad_len = score_step(cands, true, 2, 6, rng);
  bad_len["short"][0]["scores"].push_back(0.5);
  CHECK(call(s, bad_len)["code"] == "INVALID_ACTION");
  json bad_mask = score_step(cands, true, 2, 7, rng);
  bad_mask["short"][1] = {{"mask", {2, 0, 0}}};
  CHECK(call(s, bad_mask)["code"] == "MALFORMED");
  const json ok = call(s, score_step(cands, true, 2, 8, rng));
  CHECK(ok["type"] == "transition");
  CHECK(ok["id"] == 8);
  CHECK(ok["info"]["ledger"].is_array());
  CHECK(call(s, {{"type", "close"}, {"id", 9}})["type"] == "close");
  CHECK(s.closed());
}

TEST_CASE("mask actions and the gating error over the wire") {
  protocol::Session s(test::small_config());
  const json r = call(s, {{"type", "reset"}, {"id", 1}, {"seed", 2}});
  json shorts = json::array();
  for (const auto& c : r["candidates"]) shorts.push_back({{"mask", std::vector<int>(c.size(), 0)}});
  json req = {{"type", "step"}, {"id", 2}, {"short", shorts}, {"long", {{0, 0}, {0, 0}}}};
  const json ok = call(s, req);
  CHECK(ok["type"] == "transition");
  CHECK(ok["global_short_reward"] == 0.0);
  // Relays start with empty buffers, so scheduling one is a gating violation.
  req["short"][1]["mask"][0] = 1;
  req.erase("long");
  req["id"] = 3;
  const json err = call(s, req);
  CHECK(err["code"] == "INVALID_ACTION");
}

TEST_CASE("observation encoding round-trips exactly") {
  Environment env(ScenarioConfig{});
  std::mt19937_64 rng(2);
  Observations obs = env.reset(5);
  for (int i = 0; i < 20; ++i) obs = env.step(test::random_scores(env, obs, rng)).next;
  const std::string text = protocol::encode(obs).dump();
  const Observations back = protocol::decode_observations(json::parse(text));
  CHECK(back.short_obs == obs.short_obs);
  CHECK(back.long_obs == obs.long_obs);
  CHECK(back.slot == obs.slot);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int t = 0; t < 10000; ++t) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(json::parse(json(x).dump()).get<double>() == x);
  }
}

TEST_CASE("transcripts replay byte-identically") {
  const auto a = transcript(13, 30);
  const auto b = transcript(13, 30);
  CHECK(a == b);
  CHECK(transcript(14, 5) != std::vector<std::string>(a.begin(), a.begin() + 7));
}

TEST_CASE("batch envelope drives several environments") {
  protocol::Session s(test::small_config());
  const json resp = call(s, {{"type", "batch"},
                             {"id", 1},
                             {"requests",
                              {{{"type", "reset"}, {"env", 0}, {"seed", 1}},
                               {{"type", "reset"}, {"env", 1}, {"seed", 1}},
                               {{"type", "reset"}, {"env", 2}, {"seed", 2}}}}});
  REQUIRE(resp["responses"].size() == 3);
  CHECK(resp["responses"][0]["obs"] == resp["responses"][1]["obs"]);
  CHECK(resp["responses"][0]["obs"] != resp["responses"][2]["obs"]);
  CHECK(resp["responses"][2]["env"] == 2);
  CHECK(call(s, {{"type", "reset"}, {"env", 100000}, {"seed", 1}})["code"] == "MALFORMED");
}

TEST_CASE("stdio stream serving") {
  std::istringstream in(json{{"type", "hello"}, {"id", 1}}.dump() + "\n\n" +
                        json{{"type", "close"}, {"id", 2}}.dump() + "\n" +
                        json{{"type", "hello"}, {"id", 3}}.dump() + "\n");
  std::ostringstream out;
  protocol::serve_stream(test::small_config(), in, out);
  std::istringstream lines(out.str());
  std::string l1, l2, l3;
  std::getline(lines, l1);
  std::getline(lines, l2);
  CHECK(json::parse(l1)["type"] == "hello");
  CHECK(json::parse(l2)["type"] == "close");
  CHECK_FALSE(std::getline(lines, l3));
}

TEST_CASE("tcp sessions are isolated") {
  protocol::TcpServer server(test::small_config());
  const int port = server.start(0);
  REQUIRE(port > 0);
  auto connect_to = [&] {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in a{};
    a.sin_family = AF_INET;
    a.sin_port = htons(static_cast<std::uint16_t>(port));
    a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&a), sizeof a) == 0);
    return fd;
  };
  auto roundtrip = [](int fd, const json& req) {
    const std::string line = req.dump() + "\n";
    REQUIRE(::send(fd, line.data(), line.size(), 0) == static_cast<ssize_t>(line.size()));
    std::string got;
    char c;
    while (::recv(fd, &c, 1, 0) == 1 && c != '\n') got.push_back(c);
    return json::parse(got);
  };
  const int a = connect_to();
  const int b = connect_to();
  CHECK(roundtrip(a, {{"type", "reset"}, {"id", 1}, {"seed", 3}})["type"] == "obs");
  CHECK(roundtrip(b, {{"type", "step"}, {"id", 1}, {"short", json::array()}})["code"] == "NOT_RESET");
  CHECK(roundtrip(a, {{"type", "hello"}, {"id", 2}})["id"] == 2);
  ::close(a);
  ::close(b);
  server.stop();
}

}
