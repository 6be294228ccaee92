#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "iab/env.hpp"
#include "iab/errors.hpp"
#include "support.hpp"

using namespace iab;

namespace {

Errc error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::domain_error;
}

// Highest-scoring feasible C-subset by enumeration, ties broken toward the
// lexicographically smallest index set.
std::vector<std::uint8_t> brute_force_top(const std::vector<double>& s,
                                          const std::vector<std::uint8_t>& elig, int cap) {
  const std::size_t n = s.size();
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (elig[i]) idx.push_back(i);
  }
  const std::size_t k = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(cap));
  std::vector<std::uint8_t> best(n, 0);
  double best_sum = -1e300;
  std::vector<std::uint8_t> pick(idx.size(), 0);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(k), 1);
  do {
    double sum = 0.0;
    std::vector<std::uint8_t> m(n, 0);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (pick[i]) {
        sum += s[idx[i]];
        m[idx[i]] = 1;
      }
    }
    if (sum > best_sum) {
      best_sum = sum;
      best = m;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

ActionInput all_zero_scores(const Environment& env, const Observations& obs) {
  ActionInput in;
  for (int k = 0; k < env.n_uav(); ++k) {
    in.short_actions.push_back(ShortAction::from_scores(std::vector<double>(env.candidate_count(k), 0.0)));
  }
  if (obs.long_action_due) in.long_actions = std::vector<Velocity>(static_cast<std::size_t>(env.n_long_agents()));
  return in;
}

}  // namespace

TEST_SUITE("env") {

TEST_CASE("score sanitization takes the top C among eligible") {
  const std::vector<std::uint8_t> elig{1, 1, 1, 1, 1, 1};
  const auto m = sanitize_short_action(ShortAction::from_scores({0.1, 0.9, 0.5, 0.3, 0.8, 0.2}), elig, 4);
  CHECK(m == std::vector<std::uint8_t>{0, 1, 1, 1, 1, 0});
  const std::vector<std::uint8_t> none(6, 0);
  const auto e = sanitize_short_action(ShortAction::from_scores({1, 2, 3, 4, 5, 6}), none, 4);
  CHECK(std::count(e.begin(), e.end(), 1) == 0);
  const auto tie = sanitize_short_action(ShortAction::from_scores({0.5, 0.7, 0.5, 0.9, 0.5, 0.1}), elig, 3);
  CHECK(tie == std::vector<std::uint8_t>{1, 1, 0, 1, 0, 0});
}

TEST_CASE("score sanitization equals brute-force enumeration") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> q(0, 3), e(0, 1), c(1, 6);
  for (int t = 0; t < 3000; ++t) {
    std::vector<double> s(6);
    for (auto& x : s) x = q(rng) * 0.25;
    std::vector<std::uint8_t> elig(6);
    for (auto& x : elig) x = static_cast<std::uint8_t>(e(rng));
    const int cap = c(rng);
    CHECK(sanitize_short_action(ShortAction::from_scores(s), elig, cap) == brute_force_top(s, elig, cap));
  }
}

TEST_CASE("mask validation names the violated constraint") {
  const std::vector<std::uint8_t> elig{1, 0, 1, 1};
  CHECK(sanitize_short_action(ShortAction::from_mask({1, 0, 1, 0}), elig, 2) ==
        std::vector<std::uint8_t>{1, 0, 1, 0});
  try {
    sanitize_short_action(ShortAction::from_mask({1, 1, 0, 0}), elig, 4);
    FAIL("gating");
  } catch (const Error& ex) {
    CHECK(ex.code() == Errc::invalid_action);
    CHECK(std::string(ex.what()).find("buffer gating") != std::string::npos);
  }
  try {
    sanitize_short_action(ShortAction::from_mask({1, 0, 1, 1}), elig, 2);
    FAIL("limit");
  } catch (const Error& ex) {
    CHECK(std::string(ex.what()).find("scheduling limit") != std::string::npos);
  }
  CHECK(error_of([&] { sanitize_short_action(ShortAction::from_mask({1, 0}), elig, 2); }) == Errc::invalid_action);
  CHECK(error_of([&] { sanitize_short_action(ShortAction::from_scores({1, 0, NAN, 2}), elig, 2); }) ==
        Errc::invalid_action);
}

TEST_CASE("velocity clamp and long reward") {
  CHECK(clamp_velocity({25.0, -3.0}, 10.0) == Velocity{10.0, -3.0});
  CHECK(clamp_velocity({-11.0, 10.0}, 10.0) == Velocity{-10.0, 10.0});
  CHECK(error_of([] { clamp_velocity({NAN, 0.0}, 10.0); }) == Errc::invalid_action);
  const std::vector<double> c(10, 7.0);
  CHECK(long_reward(c, 10) == 7.0);
  const std::vector<double> one{3.0};
  CHECK(long_reward(one, 1) == 3.0);
  const std::vector<double> block{0, 10, 20, 30, 40, 50, 60, 70, 80, 90};
  CHECK(long_reward(block, 10) == 45.0);
  CHECK(long_reward(block, 10, LongRewardMode::sum) == 450.0);
}

TEST_CASE("reset is deterministic and zeroes the previous-step fields") {
  Environment env(ScenarioConfig{});
  const Observations a = env.reset(7);
  const Observations b = env.reset(7);
  CHECK(a.short_obs == b.short_obs);
  CHECK(a.long_obs == b.long_obs);
  CHECK(a.long_action_due);
  for (int k = 0; k < env.n_uav(); ++k) {
    const auto& l = env.short_layout(k);
    CHECK(a.short_obs[k][l.field("prev_reward").offset] == 0.0);
    const auto& s = l.field("sinr");
    for (std::size_t i = 0; i < s.length; ++i) CHECK(a.short_obs[k][s.offset + i] == 0.0);
  }
  for (const auto& o : a.long_obs) CHECK(o[env.long_layout().field("prev_reward").offset] == 0.0);
}

TEST_CASE("donor observation covers its users and every relay") {
  Environment env(ScenarioConfig{});
  CHECK(env.candidate_count(0) == 24);
  CHECK(env.short_layout(0).field("buffer").length == 3 * 24);
  CHECK(env.short_layout(1).field("buffer").length == 3 * 10);
  CHECK(env.long_layout().field("rssi").length == 10);
  CHECK(env.long_layout().size == 10 + 1 + 2 + 3 + 3);
  CHECK(env.n_short_agents() == 5);
  CHECK(env.n_long_agents() == 4);
}

TEST_CASE("step preconditions") {
  Environment env(test::small_config());
  CHECK(error_of([&] { env.step({}); }) == Errc::not_reset);
  Observations obs = env.reset(1);
  ActionInput no_long = all_zero_scores(env, obs);
  no_long.long_actions.reset();
  CHECK(error_of([&] { env.step(no_long); }) == Errc::long_action_phase);
  obs = env.step(all_zero_scores(env, obs)).next;
  CHECK_FALSE(obs.long_action_due);
  ActionInput extra = all_zero_scores(env, obs);
  extra.long_actions = std::vector<Velocity>(2);
  CHECK(error_of([&] { env.step(extra); }) == Errc::long_action_phase);
  ActionInput short_count = all_zero_scores(env, obs);
  short_count.short_actions.pop_back();
  CHECK(error_of([&] { env.step(short_count); }) == Errc::invalid_action);
}

TEST_CASE("episode ends after exactly episode_len steps") {
  ScenarioConfig c;
  Environment env(c);
  Observations obs = env.reset(3);
  int steps = 0;
  bool done = false;
  while (!done) {
    const auto tr = env.step(all_zero_scores(env, obs));
    ++steps;
    done = tr.done;
    obs = tr.next;
    CHECK(tr.done == (steps == 200));
  }
  CHECK(steps == 200);
  CHECK(error_of([&] { env.step(all_zero_scores(env, obs)); }) == Errc::episode_done);
}

TEST_CASE("no traffic means no rewards") {
  ScenarioConfig c = test::small_config();
  c.poisson_rate = 0.0;
  Environment env(c);
  Observations obs = env.reset(2);
  for (int n = 0; n < c.episode_len; ++n) {
    const auto tr = env.step(all_zero_scores(env, obs));
    CHECK(tr.global_short_reward == 0.0);
    for (double r : tr.short_rewards) CHECK(r == 0.0);
    obs = tr.next;
  }
}

TEST_CASE("single donor user delivers min(capacity, backlog)") {
  ScenarioConfig c = test::single_user_config();
  c.poisson_rate = 3.0;
  Environment env(c);
  Observations obs = env.reset(4);
  for (int n = 0; n < c.episode_len; ++n) {
    const std::int64_t backlog = env.queues().backlog(0, {TargetKind::gue, 0});
    const auto tr = env.step(all_zero_scores(env, obs));
    if (backlog == 0) {
      CHECK(tr.info.links.empty());
      CHECK(tr.short_rewards[0] == 0.0);
    } else {
      REQUIRE(tr.info.links.size() == 1);
      const auto cap = tr.info.links[0].capacity;
      CHECK(tr.short_rewards[0] == static_cast<double>(std::min(cap, backlog)));
    }
    obs = tr.next;
  }
}

TEST_CASE("rewards, ledger and totals agree") {
  Environment env(test::small_config());
  env.record_ledger(true);
  std::mt19937_64 rng(5);
  Observations obs = env.reset(11);
  double reward_sum = 0.0;
  std::int64_t ledger_delivered = 0;
  for (int n = 0; n < env.config().episode_len; ++n) {
    const auto tr = env.step(test::random_scores(env, obs, rng));
    CHECK(tr.global_short_reward == std::accumulate(tr.short_rewards.begin(), tr.short_rewards.end(), 0.0));
    CHECK(tr.global_short_reward == static_cast<double>(tr.info.delivered));
    std::int64_t slot_delivered = 0;
    for (const auto& row : tr.info.ledger) {
      if (row.target.kind == TargetKind::gue) slot_delivered += row.n_tx;
    }
    CHECK(slot_delivered == tr.info.delivered);
    ledger_delivered += slot_delivered;
    reward_sum += tr.global_short_reward;
    obs = tr.next;
  }
  CHECK(reward_sum == static_cast<double>(env.totals().delivered));
  CHECK(ledger_delivered == env.totals().delivered);
}

TEST_CASE("long rewards arrive at block ends as the block mean") {
  ScenarioConfig c = test::small_config();
  Environment env(c);
  std::mt19937_64 rng(6);
  Observations obs = env.reset(8);
  std::vector<std::vector<double>> block(2);
  for (int n = 0; n < c.episode_len; ++n) {
    const auto tr = env.step(test::random_scores(env, obs, rng));
    for (int k = 1; k <= 2; ++k) block[k - 1].push_back(tr.short_rewards[k]);
    if ((n + 1) % c.long_block == 0) {
      REQUIRE(tr.long_rewards.has_value());
      double global = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double mean = std::accumulate(block[k].begin(), block[k].end(), 0.0) / c.long_block;
        CHECK((*tr.long_rewards)[k] == doctest::Approx(mean).epsilon(1e-15));
        global += (*tr.long_rewards)[k];
        block[k].clear();
      }
      CHECK(tr.global_long_reward == doctest::Approx(global).epsilon(1e-15));
      const auto& l = env.long_layout();
      CHECK(tr.next.long_obs[0][l.field("prev_reward").offset] == (*tr.long_rewards)[0]);
    } else {
      CHECK_FALSE(tr.long_rewards.has_value());
    }
    obs = tr.next;
  }
}

TEST_CASE("relay velocities are clamped and applied once per block") {
  ScenarioConfig c = test::small_config();
  Environment env(c);
  Observations obs = env.reset(2);
  const Vec3 start = env.world().uav_pos[1];
  ActionInput in = all_zero_scores(env, obs);
  in.long_actions = std::vector<Velocity>{{-50.0, 0.0}, {0.0, 0.0}};
  auto tr = env.step(in);
  REQUIRE(tr.info.applied_velocities.size() == 2);
  CHECK(tr.info.applied_velocities[0] == Velocity{-10.0, 0.0});
  const Vec3 moved = env.world().uav_pos[1];
  CHECK(moved.x == doctest::Approx(start.x - 100.0).epsilon(1e-14));
  CHECK(moved.z == start.z);
  obs = tr.next;
  const auto& l = env.long_layout();
  CHECK(obs.long_obs[0][l.field("prev_action").offset] == -10.0);
  CHECK(obs.long_obs[0][l.field("position").offset] == moved.x);
  for (int n = 1; n < c.long_block; ++n) {
    tr = env.step(all_zero_scores(env, obs));
    obs = tr.next;
    CHECK(env.world().uav_pos[1] == moved);
  }
}

TEST_CASE("historical sinr and previous action reflect the last slot") {
  Environment env(test::small_config());
  std::mt19937_64 rng(9);
  Observations obs = env.reset(6);
  for (int n = 0; n < 15; ++n) {
    const auto tr = env.step(test::random_scores(env, obs, rng));
    for (int k = 0; k < env.n_uav(); ++k) {
      const auto& l = env.short_layout(k);
      const auto& o = tr.next.short_obs[k];
      const auto& mask = tr.info.schedule.mask[k];
      const auto& cands = env.candidates(k);
      for (std::size_t i = 0; i < mask.size(); ++i) {
        CHECK(o[l.field("prev_action").offset + i] == mask[i]);
        double want = 0.0;
        for (const auto& rep : tr.info.links) {
          if (rep.uav == k && rep.target == cands[i]) want = rep.sinr;
        }
        CHECK(o[l.field("sinr").offset + i] == want);
      }
      CHECK(o[l.field("prev_reward").offset] == tr.short_rewards[k]);
    }
    obs = tr.next;
  }
}

TEST_CASE("eligibility agrees with the observed backlog") {
  Environment env(test::small_config());
  std::mt19937_64 rng(10);
  Observations obs = env.reset(12);
  for (int n = 0; n < env.config().episode_len; ++n) {
    for (int k = 0; k < env.n_uav(); ++k) {
      const auto elig = env.eligibility(k);
      const auto& b = env.short_layout(k).field("buffer");
      for (std::size_t i = 0; i < elig.size(); ++i) {
        CHECK((obs.short_obs[k][b.offset + 3 * i] > 0.0) == static_cast<bool>(elig[i]));
      }
    }
    obs = env.step(test::random_scores(env, obs, rng)).next;
  }
}

TEST_CASE("donor-only deployment runs") {
  ScenarioConfig c = test::single_user_config();
  c.assoc_t = 5;
  c.n_gue = 5;
  c.sched_t = 2;
  c.candidate_pool = 50;
  Environment env(c);
  Observations obs = env.reset(1);
  CHECK(obs.long_obs.empty());
  std::mt19937_64 rng(1);
  for (int n = 0; n < c.episode_len; ++n) obs = env.step(test::random_scores(env, obs, rng)).next;
  CHECK(env.done());
}

}
