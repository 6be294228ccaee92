#pragma once

// Line-delimited JSON protocol. One request per line, exactly one response
// line per request; "id" is echoed back. A session owns its environments;
// requests address one with "env" (default 0).

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "iab/config.hpp"
#include "iab/env.hpp"

namespace iab::protocol {

inline constexpr int kVersion = 1;
inline constexpr std::size_t kMaxEnvs = 256;

nlohmann::json encode(const ObservationLayout& layout);
nlohmann::json encode(const Observations& obs);
nlohmann::json encode(const StepInfo& info);
nlohmann::json encode(const TransitionRecord& tr);
Observations decode_observations(const nlohmann::json& j);
ActionInput decode_action(const nlohmann::json& j);

nlohmann::json error_response(const nlohmann::json& id, std::string_view code,
                              std::string_view message);

class Session {
 public:
  explicit Session(ScenarioConfig cfg);

  /// Handles one request line and returns one response line (no newline).
  std::string handle_line(std::string_view line);
  nlohmann::json handle(const nlohmann::json& request);

  bool closed() const { return closed_; }

 private:
  Environment& env_at(const nlohmann::json& request);
  nlohmann::json hello(const nlohmann::json& request);
  nlohmann::json dispatch(const nlohmann::json& request);

  ScenarioConfig cfg_;
  std::vector<std::unique_ptr<Environment>> envs_;
  bool closed_ = false;
};

/// Reads requests from `in` until close or EOF, writing responses to `out`.
void serve_stream(const ScenarioConfig& cfg, std::istream& in, std::ostream& out);

/// TCP listener on 127.0.0.1; one thread and one session per connection.
class TcpServer {
 public:
  explicit TcpServer(ScenarioConfig cfg);
  ~TcpServer();
  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  /// Binds and starts accepting; port 0 picks an ephemeral port. Returns the bound port.
  int start(int port);
  void stop();
  void wait();
  int port() const { return port_; }

 private:
  void accept_loop();
  void serve_connection(int fd);

  ScenarioConfig cfg_;
  int listen_fd_ = -1;
  int port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

}  // namespace iab::protocol
