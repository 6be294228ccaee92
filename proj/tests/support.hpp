#pragma once

#include <random>

#include "iab/config.hpp"
#include "iab/env.hpp"

namespace iab::test {

/// Two relays, ten users; small enough for exhaustive per-slot checks.
inline ScenarioConfig small_config() {
  ScenarioConfig c;
  c.n_uuav = 2;
  c.assoc_t = 4;
  c.assoc_u = 3;
  c.n_gue = 10;
  c.sched_t = 3;
  c.sched_u = 2;
  c.candidate_pool = 400;
  c.episode_len = 40;
  c.long_block = 10;
  return c;
}

/// Donor only, one user.
inline ScenarioConfig single_user_config() {
  ScenarioConfig c;
  c.n_uuav = 0;
  c.assoc_t = 1;
  c.assoc_u = 0;
  c.n_gue = 1;
  c.sched_t = 1;
  c.candidate_pool = 10;
  c.episode_len = 10;
  c.long_block = 5;
  return c;
}

inline ActionInput random_scores(const Environment& env, const Observations& obs,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> v(-3.0 * env.config().v_d_max, 3.0 * env.config().v_d_max);
  ActionInput in;
  for (int k = 0; k < env.n_uav(); ++k) {
    std::vector<double> s(env.candidate_count(k));
    for (auto& x : s) x = u(rng);
    in.short_actions.push_back(ShortAction::from_scores(std::move(s)));
  }
  if (obs.long_action_due) {
    std::vector<Velocity> vel;
    for (int k = 0; k < env.n_long_agents(); ++k) vel.push_back({v(rng), v(rng)});
    in.long_actions = std::move(vel);
  }
  return in;
}

}  // namespace iab::test
