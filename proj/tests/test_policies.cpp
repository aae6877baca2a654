#include <doctest.h>

#include <numeric>
#include <vector>

#include "risaoi/episode.hpp"
#include "risaoi/policies.hpp"

using namespace risaoi;

namespace {

PolicyContext easy_context(int channels, double gamma_th_db = -20.0) {
  PolicyContext ctx;
  ctx.channels = channels;
  ctx.gamma_th = db_to_linear(gamma_th_db);
  ctx.params.gamma0 = 1.0;
  ctx.params.tx_power = 1.0;
  ctx.params.noise_power = 1.0;
  return ctx;
}

ChannelRealization strong_channel(int streams, int elements, RandomStream& rng) {
  Geometry g;
  g.bs_position = {0.0, 0.0};
  g.ris_position = {2.0, 0.0};
  for (int i = 0; i < streams; ++i) g.user_positions.push_back({3.0 + 0.2 * i, 0.5});
  ChannelParams p;
  p.gamma0 = 1.0;
  return draw_channels(g, p, elements, rng);
}

std::vector<StreamState> states_with_ages(const std::vector<std::int64_t>& ages,
                                          const std::vector<bool>& queues) {
  std::vector<StreamState> s(ages.size());
  for (std::size_t i = 0; i < ages.size(); ++i) {
    s[i].age = ages[i];
    s[i].queue_flag = queues[i];
    s[i].system_time = 0;
  }
  return s;
}

// Joint feasibility of scheduling every member of `subset` in one slot,
// checked by an exhaustive phase grid (64 points per element).
bool subset_feasible_by_grid(const ChannelRealization& ch, const std::vector<int>& subset,
                             const PolicyContext& ctx, int points = 64) {
  if (subset.empty()) return true;
  const int f = static_cast<int>(ch.elements());
  std::vector<int> idx(static_cast<std::size_t>(f), 0);
  for (;;) {
    PhaseProfile prof;
    prof.phases.resize(static_cast<std::size_t>(f));
    for (int j = 0; j < f; ++j)
      prof.phases[static_cast<std::size_t>(j)] = kTwoPi * idx[static_cast<std::size_t>(j)] / points;
    bool all = true;
    for (int i : subset)
      all = all && snr(ch, prof, static_cast<std::size_t>(i), ctx.params) >= ctx.gamma_th;
    if (all) return true;
    int j = 0;
    for (; j < f; ++j) {
      if (++idx[static_cast<std::size_t>(j)] < points) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
    if (j == f) break;
  }
  return false;
}

}  // namespace

TEST_CASE("every policy honors the cardinality constraint") {
  RandomStream rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const int streams = 2 + static_cast<int>(rng.bits() % 4);
    const int channels = 1 + static_cast<int>(rng.bits() % static_cast<unsigned>(streams));
    PolicyContext ctx = easy_context(channels, rng.uniform(-10.0, 20.0));
    const ChannelRealization ch = strong_channel(streams, 4, rng);
    std::vector<StreamState> states(static_cast<std::size_t>(streams));
    for (auto& s : states) {
      s.age = 1 + static_cast<std::int64_t>(rng.bits() % 20);
      s.queue_flag = rng.bernoulli(0.6);
    }
    RoundRobinCursor cursor;
    for (PolicyKind k : all_policies()) {
      const SchedulingDecision d = schedule(k, states, ch, ctx, rng, cursor);
      int used = 0;
      for (auto x : d.x) used += x;
      CHECK(used <= channels);
    }
  }
}

TEST_CASE("alg1 schedules only queue-holding streams above threshold") {
  RandomStream rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const int streams = 3;
    PolicyContext ctx = easy_context(2, rng.uniform(0.0, 30.0));
    const ChannelRealization ch = strong_channel(streams, 3, rng);
    std::vector<StreamState> states(streams);
    for (auto& s : states) {
      s.age = 1 + static_cast<std::int64_t>(rng.bits() % 15);
      s.queue_flag = rng.bernoulli(0.5);
    }
    const SchedulingDecision d = schedule_alg1(states, ch, ctx, rng);
    for (int i = 0; i < streams; ++i) {
      if (d.x[static_cast<std::size_t>(i)]) {
        CHECK(states[static_cast<std::size_t>(i)].queue_flag);
        CHECK(d.per_stream_snr[static_cast<std::size_t>(i)] >= ctx.gamma_th);
      }
    }
    CHECK(d.relaxed_scores.has_value());
    for (double s : *d.relaxed_scores) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
    }
  }
}

TEST_CASE("alg1: all queues empty means nothing is scheduled") {
  RandomStream rng(13);
  PolicyContext ctx = easy_context(2);
  const ChannelRealization ch = strong_channel(3, 4, rng);
  const auto states = states_with_ages({5, 3, 9}, {false, false, false});
  const SchedulingDecision d = schedule_alg1(states, ch, ctx, rng);
  for (auto x : d.x) CHECK(x == 0);
  CHECK(d.sdp_solves == 0);
}

TEST_CASE("alg1: single feasible stream is scheduled and delivers") {
  RandomStream rng(17);
  PolicyContext ctx = easy_context(1, -10.0);
  const ChannelRealization ch = strong_channel(1, 1, rng);
  REQUIRE(subset_feasible_by_grid(ch, {0}, ctx, 3600));  // threshold attainable
  const auto states = states_with_ages({4}, {true});
  const SchedulingDecision d = schedule_alg1(states, ch, ctx, rng);
  CHECK(d.x[0] == 1);
  const SlotOutcome o = make_outcome(d.x[0] != 0, true, d.per_stream_c[0] != 0);
  CHECK(o.delivered);
}

TEST_CASE("alg1 subset choice against exhaustive enumeration") {
  RandomStream rng(19);
  int wins = 0, comparisons = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int streams = 2 + static_cast<int>(rng.bits() % 3);  // up to 4
    const int channels = 1 + static_cast<int>(rng.bits() % 2);
    const int elements = 1 + static_cast<int>(rng.bits() % 2);
    PolicyContext ctx = easy_context(channels, rng.uniform(8.0, 16.0));
    const ChannelRealization ch = strong_channel(streams, elements, rng);
    std::vector<StreamState> states(static_cast<std::size_t>(streams));
    for (auto& s : states) {
      s.age = 1 + static_cast<std::int64_t>(rng.bits() % 12);
      s.queue_flag = rng.bernoulli(0.7);
    }
    const SchedulingDecision d = schedule_alg1(states, ch, ctx, rng);
    std::int64_t chosen_value = 0;
    for (int i = 0; i < streams; ++i)
      if (d.x[static_cast<std::size_t>(i)]) chosen_value += states[static_cast<std::size_t>(i)].age;

    // Enumerate all queue-holding subsets of size <= N.
    std::vector<int> holders;
    for (int i = 0; i < streams; ++i)
      if (states[static_cast<std::size_t>(i)].queue_flag) holders.push_back(i);
    const int m = static_cast<int>(holders.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      std::vector<int> subset;
      for (int j = 0; j < m; ++j)
        if (mask & (1 << j)) subset.push_back(holders[static_cast<std::size_t>(j)]);
      if (static_cast<int>(subset.size()) > channels) continue;
      if (!subset_feasible_by_grid(ch, subset, ctx)) continue;
      std::int64_t value = 0;
      for (int i : subset) value += states[static_cast<std::size_t>(i)].age;
      ++comparisons;
      if (chosen_value >= value) ++wins;
    }
  }
  REQUIRE(comparisons > 0);
  CHECK(static_cast<double>(wins) / comparisons >= 0.95);
}

TEST_CASE("alg2: nothing scheduled when no channel clears") {
  RandomStream rng(23);
  PolicyContext ctx = easy_context(2, 200.0);  // unreachable threshold
  const ChannelRealization ch = strong_channel(3, 2, rng);
  const auto states = states_with_ages({9, 5, 1}, {true, true, true});
  const SchedulingDecision d = schedule_alg2(states, ch, ctx, rng);
  for (auto x : d.x) CHECK(x == 0);
}

TEST_CASE("alg2: oldest cleared streams win the channels") {
  RandomStream rng(29);
  PolicyContext ctx = easy_context(2, -40.0);  // everyone clears
  const ChannelRealization ch = strong_channel(3, 2, rng);
  const auto states = states_with_ages({9, 5, 1}, {true, true, true});
  const SchedulingDecision d = schedule_alg2(states, ch, ctx, rng);
  for (auto c : d.per_stream_c) CHECK(c == 1);
  CHECK(d.x[0] == 1);
  CHECK(d.x[1] == 1);
  CHECK(d.x[2] == 0);
}

TEST_CASE("alg2 ignores queue occupancy") {
  RandomStream rng(31);
  PolicyContext ctx = easy_context(1, -40.0);
  const ChannelRealization ch = strong_channel(2, 2, rng);
  const auto states = states_with_ages({9, 5}, {false, true});  // oldest has no packet
  const SchedulingDecision d = schedule_alg2(states, ch, ctx, rng);
  CHECK(d.x[0] == 1);  // scheduled anyway
  const SlotOutcome o = make_outcome(true, states[0].queue_flag, d.per_stream_c[0] != 0);
  CHECK(!o.delivered);  // and the slot is lost
}

TEST_CASE("alg3 selects by age with index tie-break") {
  RandomStream rng(37);
  PolicyContext ctx = easy_context(1);
  const ChannelRealization ch = strong_channel(3, 2, rng);
  {
    const auto states = states_with_ages({1, 2, 3}, {true, true, true});
    const SchedulingDecision d = schedule_alg3(states, ch, ctx, rng);
    CHECK(d.x == std::vector<std::uint8_t>{0, 0, 1});
  }
  {
    const auto states = states_with_ages({4, 4, 4}, {true, true, true});
    const SchedulingDecision d = schedule_alg3(states, ch, ctx, rng);
    CHECK(d.x == std::vector<std::uint8_t>{1, 0, 0});
  }
}

TEST_CASE("alg3 reports per-stream SNR against the configured threshold") {
  RandomStream rng(41);
  PolicyContext ctx = easy_context(2, 28.0);  // the default threshold
  const ChannelRealization ch = strong_channel(3, 4, rng);
  const auto states = states_with_ages({7, 3, 5}, {true, true, true});
  const SchedulingDecision d = schedule_alg3(states, ch, ctx, rng);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(d.per_stream_snr[i] == doctest::Approx(snr(ch, d.profile, i, ctx.params)));
    CHECK((d.per_stream_c[i] != 0) == (d.per_stream_snr[i] >= ctx.gamma_th));
  }
}

TEST_CASE("alg4 rotates deterministically") {
  RandomStream rng(43);
  PolicyContext ctx = easy_context(2);
  const ChannelRealization ch = strong_channel(4, 2, rng);
  const auto states = states_with_ages({1, 1, 1, 1}, {true, true, true, true});
  RoundRobinCursor cursor;
  const SchedulingDecision d1 = schedule_alg4(states, ch, ctx, cursor, rng);
  CHECK(d1.x == std::vector<std::uint8_t>{1, 1, 0, 0});
  const SchedulingDecision d2 = schedule_alg4(states, ch, ctx, cursor, rng);
  CHECK(d2.x == std::vector<std::uint8_t>{0, 0, 1, 1});
  const SchedulingDecision d3 = schedule_alg4(states, ch, ctx, cursor, rng);
  CHECK(d3.x == std::vector<std::uint8_t>{1, 1, 0, 0});
}

TEST_CASE("round-robin counts stay balanced") {
  RoundRobinCursor cursor;
  const int streams = 5, channels = 2, slots = 4000;
  std::vector<int> counts(streams, 0);
  for (int t = 0; t < slots; ++t)
    for (int i : cursor.take(channels, streams)) counts[static_cast<std::size_t>(i)]++;
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);
  // I divides T*N here, so every stream is selected exactly T*N/I times
  CHECK(*hi == slots * channels / streams);
}

TEST_CASE("no_ris uses the direct link only") {
  RandomStream rng(47);
  PolicyContext ctx = easy_context(1, 0.0);
  ChannelRealization ch = strong_channel(2, 6, rng);
  const auto states = states_with_ages({3, 8}, {true, true});
  const SchedulingDecision d = schedule_no_ris(states, ctx, ch);
  CHECK(d.x == std::vector<std::uint8_t>{0, 1});
  for (std::size_t i = 0; i < 2; ++i)
    CHECK(d.per_stream_snr[i] ==
          doctest::Approx(ctx.params.tx_power * std::norm(ch.h_bi[i]) / ctx.params.noise_power));

  // deep fade: no deliveries possible this slot
  ch.h_bi = {cxd(1e-12, 0.0), cxd(0.0, 1e-12)};
  const SchedulingDecision d2 = schedule_no_ris(states, ctx, ch);
  for (std::size_t i = 0; i < 2; ++i) {
    const SlotOutcome o = make_outcome(d2.x[i] != 0, true, d2.per_stream_c[i] != 0);
    CHECK(!o.delivered);
  }
}

TEST_CASE("decisions are pure functions of their inputs") {
  RandomStream chan_rng(53);
  const ChannelRealization ch = strong_channel(3, 5, chan_rng);
  const auto states = states_with_ages({4, 9, 2}, {true, true, true});
  PolicyContext ctx = easy_context(2, 10.0);
  for (PolicyKind k : all_policies()) {
    RoundRobinCursor c1, c2;
    RandomStream r1(314), r2(314);
    const SchedulingDecision a = schedule(k, states, ch, ctx, r1, c1);
    const SchedulingDecision b = schedule(k, states, ch, ctx, r2, c2);
    CHECK(a.x == b.x);
    CHECK(a.profile.phases == b.profile.phases);
    CHECK(a.per_stream_snr == b.per_stream_snr);
  }
}

TEST_CASE("removing the RIS never helps the max-age policy") {
  SimulationConfig cfg;
  cfg.streams = 3;
  cfg.channels = 1;
  cfg.ris_elements = 24;
  cfg.horizon = 150;
  cfg.replications = 20;
  double with_ris = 0.0, without = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.policy = "alg3";
    with_ris += static_cast<double>(run_episode(cfg, seed).summary.sum_aoi);
    cfg.policy = "no_ris";
    without += static_cast<double>(run_episode(cfg, seed).summary.sum_aoi);
  }
  CHECK(without >= with_ris);
}
