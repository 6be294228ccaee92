#include "iab/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <istream>
#include <ostream>

#include "iab/errors.hpp"

namespace iab::protocol {

using nlohmann::json;

namespace {

struct Malformed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

json target_json(int uav, const LinkTarget& t) {
  return {{"uav", uav},
          {"kind", t.kind == TargetKind::gue ? "gue" : "uuav"},
          {"id", t.id},
          {"link", link_name(uav, t)}};
}

std::vector<double> number_array(const json& j, const char* what) {
  if (!j.is_array()) throw Malformed(std::string(what) + " must be an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) throw Malformed(std::string(what) + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

}  // namespace

json encode(const ObservationLayout& layout) {
  json fields = json::array();
  for (const auto& f : layout.fields) {
    fields.push_back({{"name", f.name}, {"offset", f.offset}, {"length", f.length}});
  }
  return {{"size", layout.size}, {"fields", fields}};
}

json encode(const Observations& obs) {
  return {{"slot", obs.slot},
          {"long_action_due", obs.long_action_due},
          {"short", obs.short_obs},
          {"long", obs.long_obs}};
}

Observations decode_observations(const json& j) {
  Observations o;
  o.slot = require(j, "slot").get<int>();
  o.long_action_due = require(j, "long_action_due").get<bool>();
  o.short_obs = require(j, "short").get<std::vector<std::vector<double>>>();
  o.long_obs = require(j, "long").get<std::vector<std::vector<double>>>();
  return o;
}

json encode(const StepInfo& info) {
  json links = json::array();
  for (const auto& l : info.links) {
    json t = target_json(l.uav, l.target);
    t["sinr"] = l.sinr;
    t["capacity"] = l.capacity;
    t["n_tx"] = l.n_tx;
    links.push_back(std::move(t));
  }
  json ledger = json::array();
  for (const auto& r : info.ledger) {
    ledger.push_back({{"slot", r.slot},
                      {"link", link_name(r.uav, r.target)},
                      {"n_new", r.n_new},
                      {"n_cum", r.n_cum},
                      {"n_tx", r.n_tx},
                      {"dropped", r.dropped}});
  }
  json velocities = json::array();
  for (const auto& v : info.applied_velocities) velocities.push_back({v.vx, v.vy});
  return {{"slot", info.slot},
          {"arrivals", info.arrivals},
          {"delivered", info.delivered},
          {"relayed", info.relayed},
          {"dropped", info.dropped},
          {"delivered_per_uav", info.delivered_per_uav},
          {"dropped_per_uav", info.dropped_per_uav},
          {"max_delivered_age", info.max_delivered_age},
          {"schedule", info.schedule.mask},
          {"applied_velocities", velocities},
          {"links", links},
          {"ledger", ledger}};
}

json encode(const TransitionRecord& tr) {
  json j = {{"short_rewards", tr.short_rewards},
            {"global_short_reward", tr.global_short_reward},
            {"long_rewards", nullptr},
            {"global_long_reward", nullptr},
            {"done", tr.done},
            {"obs", encode(tr.next)},
            {"info", encode(tr.info)}};
  if (tr.long_rewards) {
    j["long_rewards"] = *tr.long_rewards;
    j["global_long_reward"] = tr.global_long_reward;
  }
  return j;
}

ActionInput decode_action(const json& j) {
  ActionInput in;
  const json& shorts = require(j, "short");
  if (!shorts.is_array()) throw Malformed("'short' must be an array");
  for (const auto& a : shorts) {
    if (a.is_array()) {
      in.short_actions.push_back(ShortAction::from_scores(number_array(a, "scores")));
    } else if (a.is_object() && a.contains("scores")) {
      in.short_actions.push_back(ShortAction::from_scores(number_array(a["scores"], "scores")));
    } else if (a.is_object() && a.contains("mask")) {
      const auto raw = number_array(a["mask"], "mask");
      std::vector<std::uint8_t> m(raw.size());
      for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] != 0.0 && raw[i] != 1.0) throw Malformed("mask entries must be 0 or 1");
        m[i] = raw[i] != 0.0 ? 1 : 0;
      }
      in.short_actions.push_back(ShortAction::from_mask(std::move(m)));
    } else {
      throw Malformed("short action must be a score array, {scores} or {mask}");
    }
  }
  if (j.contains("long") && !j["long"].is_null()) {
    std::vector<Velocity> v;
    for (const auto& p : j["long"]) {
      const auto xy = number_array(p, "velocity");
      if (xy.size() != 2) throw Malformed("velocity must be [vx, vy]");
      v.push_back({xy[0], xy[1]});
    }
    in.long_actions = std::move(v);
  }
  return in;
}

json error_response(const json& id, std::string_view code, std::string_view message) {
  return {{"type", "error"}, {"id", id}, {"code", code}, {"message", message}};
}

Session::Session(ScenarioConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

Environment& Session::env_at(const json& request) {
  std::size_t index = 0;
  if (request.contains("env")) {
    const auto& e = request["env"];
    if (!e.is_number_unsigned()) throw Malformed("'env' must be a non-negative integer");
    index = e.get<std::size_t>();
  }
  if (index >= kMaxEnvs) throw Malformed("'env' exceeds " + std::to_string(kMaxEnvs - 1));
  if (index >= envs_.size()) envs_.resize(index + 1);
  if (!envs_[index]) {
    envs_[index] = std::make_unique<Environment>(cfg_);
    envs_[index]->record_ledger(true);
  }
  return *envs_[index];
}

json Session::hello(const json& request) {
  Environment& env = env_at(request);
  json short_agents = json::array();
  for (int k = 0; k < env.n_uav(); ++k) {
    short_agents.push_back({{"agent", k},
                            {"name", k == kDonor ? std::string("T0") : "U" + std::to_string(k)},
                            {"capacity", env.capacity(k)},
                            {"candidates", env.candidate_count(k)},
                            {"observation", encode(env.short_layout(k))}});
  }
  json long_agents = json::array();
  for (int k = 1; k < env.n_uav(); ++k) {
    long_agents.push_back({{"agent", k},
                           {"name", "U" + std::to_string(k)},
                           {"v_max", env.config().v_d_max},
                           {"observation", encode(env.long_layout())}});
  }
  return {{"type", "hello"},
          {"protocol_version", kVersion},
          {"config_hash", config_hash(cfg_)},
          {"long_block", cfg_.long_block},
          {"episode_len", cfg_.episode_len},
          {"short_agents", short_agents},
          {"long_agents", long_agents},
          {"action",
           {{"short", "array of per-agent {scores:[...]} or {mask:[0|1,...]}"},
            {"long", "array of per-relay [vx, vy], required iff long_action_due"}}}};
}

json Session::dispatch(const json& request) {
  const json& type = require(request, "type");
  if (!type.is_string()) throw Malformed("'type' must be a string");
  const std::string t = type.get<std::string>();
  if (t == "hello") return hello(request);
  if (t == "reset") {
    const json& seed = require(request, "seed");
    if (!seed.is_number_unsigned()) throw Malformed("'seed' must be a non-negative integer");
    EpisodeSeeds s{seed.get<std::uint64_t>(), seed.get<std::uint64_t>()};
    if (request.contains("scenario_seed")) {
      if (!request["scenario_seed"].is_number_unsigned()) {
        throw Malformed("'scenario_seed' must be a non-negative integer");
      }
      s.scenario = request["scenario_seed"].get<std::uint64_t>();
    }
    Environment& env = env_at(request);
    json j = {{"type", "obs"}, {"obs", encode(env.reset(s))}};
    json cands = json::array();
    for (int k = 0; k < env.n_uav(); ++k) {
      json names = json::array();
      for (const auto& c : env.candidates(k)) names.push_back(link_name(k, c));
      cands.push_back(std::move(names));
    }
    j["candidates"] = std::move(cands);
    return j;
  }
  if (t == "step") {
    Environment& env = env_at(request);
    if (!env.is_reset()) throw Error(Errc::not_reset, "step before reset");
    const ActionInput action = decode_action(request);
    json j = encode(env.step(action));
    j["type"] = "transition";
    return j;
  }
  if (t == "close") {
    closed_ = true;
    return {{"type", "close"}};
  }
  if (t == "batch") {
    const json& reqs = require(request, "requests");
    if (!reqs.is_array()) throw Malformed("'requests' must be an array");
    json out = json::array();
    for (const auto& r : reqs) out.push_back(handle(r));
    return {{"type", "batch"}, {"responses", out}};
  }
  return error_response(nullptr, "UNKNOWN_TYPE", "unknown message type '" + t + "'");
}

json Session::handle(const json& request) {
  const json id = request.is_object() && request.contains("id") ? request["id"] : json(nullptr);
  json response;
  try {
    response = dispatch(request);
  } catch (const Malformed& e) {
    response = error_response(id, "MALFORMED", e.what());
  } catch (const Error& e) {
    response = error_response(id, to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    response = error_response(id, "MALFORMED", e.what());
  }
  response["id"] = id;
  if (request.is_object() && request.contains("env")) response["env"] = request["env"];
  return response;
}

std::string Session::handle_line(std::string_view line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::parse_error& e) {
    return error_response(nullptr, "MALFORMED", e.what()).dump();
  }
  if (!request.is_object()) return error_response(nullptr, "MALFORMED", "request must be an object").dump();
  return handle(request).dump();
}

void serve_stream(const ScenarioConfig& cfg, std::istream& in, std::ostream& out) {
  Session session(cfg);
  std::string line;
  while (!session.closed() && std::getline(in, line)) {
    if (line.empty()) continue;
    out << session.handle_line(line) << '\n';
    out.flush();
  }
}

TcpServer::TcpServer(ScenarioConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

TcpServer::~TcpServer() { stop(); }

int TcpServer::start(int port) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw std::runtime_error("socket() failed");
  int yes = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw std::runtime_error("cannot listen on port " + std::to_string(port));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
  return port_;
}

void TcpServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (!running_) break;
      continue;
    }
    std::lock_guard lock(mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve_connection(fd); });
  }
}

void TcpServer::serve_connection(int fd) {
  Session session(cfg_);
  std::string buffer;
  char chunk[4096];
  while (!session.closed()) {
    const auto n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while (!session.closed() && (nl = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.empty()) continue;
      const std::string out = session.handle_line(line) + '\n';
      std::size_t sent = 0;
      while (sent < out.size()) {
        const auto w = ::send(fd, out.data() + sent, out.size() - sent, MSG_NOSIGNAL);
        if (w <= 0) return;
        sent += static_cast<std::size_t>(w);
      }
    }
  }
  ::shutdown(fd, SHUT_RDWR);
}

void TcpServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.join();
  for (int fd : client_fds_) ::close(fd);
  client_fds_.clear();
}

void TcpServer::wait() {
  while (running_) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

}  // namespace iab::protocol
