#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iab {

enum class Errc {
  invalid_config,
  scenario_infeasible,
  invalid_action,
  long_action_phase,
  not_reset,
  episode_done,
  degenerate_channel,
  domain_error,
  constraint_violation,
};

/// Machine-readable name, also used as the wire error code.
std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace iab
