#include <doctest.h>

#include <vector>

#include "risaoi/aoi.hpp"
#include "risaoi/validation.hpp"

using namespace risaoi;

TEST_CASE("draw_arrival basics") {
  RandomStream rng(3);
  for (int k = 0; k < 100; ++k) CHECK(draw_arrival(1.0, rng));
  CHECK_THROWS_AS(draw_arrival(0.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(draw_arrival(1.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(draw_arrival(-0.2, rng), std::invalid_argument);
}

TEST_CASE("draw_arrival empirical rate at lambda = 0.3") {
  RandomStream rng(5);
  const int draws = 100000;
  int hits = 0;
  for (int k = 0; k < draws; ++k) hits += draw_arrival(0.3, rng) ? 1 : 0;
  const double rate = static_cast<double>(hits) / draws;
  CHECK(rate > 0.295);
  CHECK(rate < 0.305);
}

TEST_CASE("draw_arrival determinism") {
  RandomStream a(42), b(42);
  for (int k = 0; k < 1000; ++k) CHECK(draw_arrival(0.3, a) == draw_arrival(0.3, b));
}

TEST_CASE("step_age branches") {
  StreamState s;
  s.age = 10;
  s.system_time = 4;
  CHECK(step_age(s, SlotOutcome{true, true, true}) == 5);
  s.age = 3;
  s.system_time = 0;
  CHECK(step_age(s, SlotOutcome{true, true, false}) == 4);
}

TEST_CASE("step_system_time branches") {
  StreamState s;
  s.system_time = 7;
  CHECK(step_system_time(s, true) == 0);
  CHECK(step_system_time(s, false) == 8);
}

TEST_CASE("step_queue_flag branches") {
  StreamState s;
  s.queue_flag = true;
  CHECK(step_queue_flag(s, SlotOutcome{true, true, true}, false) == false);
  s.queue_flag = false;
  CHECK(step_queue_flag(s, SlotOutcome{false, false, false}, true) == true);
  s.queue_flag = true;
  CHECK(step_queue_flag(s, SlotOutcome{true, false, false}, false) == true);
}

// The worked single-stream trace: age starts at 3; a packet arrives at t = 1
// and is discarded by a fresh arrival at t = 3; scheduling fails at t = 4 and
// succeeds at t = 6, dropping the age to 4 at t = 7.
TEST_CASE("worked single-stream trace") {
  const int horizon = 7;
  const bool arrivals[horizon + 1] = {false, true, false, true, false, false, false, false};
  const bool scheduled[horizon + 1] = {false, false, false, false, true, false, true, false};
  const bool channel_ok[horizon + 1] = {false, false, false, false, false, false, true, false};

  StreamState s;
  s.age = 3;
  s.system_time = 0;
  s.arrival = arrivals[1];
  s.queue_flag = arrivals[1];

  std::vector<std::int64_t> ages{0}, zs{0};  // 1-based
  for (int t = 1; t <= horizon; ++t) {
    ages.push_back(s.age);
    zs.push_back(s.system_time);
    const SlotOutcome o = make_outcome(scheduled[t], s.queue_flag, channel_ok[t]);
    const bool a_next = t < horizon && arrivals[t + 1];
    const std::int64_t age_next = step_age(s, o);
    s.system_time = step_system_time(s, a_next);
    s.queue_flag = step_queue_flag(s, o, a_next);
    s.age = age_next;
    s.arrival = a_next;
  }
  CHECK(zs[1] == 0);
  CHECK(zs[2] == 1);
  CHECK(zs[3] == 0);  // fresh packet resets the clock
  CHECK(zs[6] == 3);
  CHECK(ages[1] == 3);
  CHECK(ages[4] == 6);
  CHECK(ages[5] == 7);
  CHECK(ages[6] == 8);
  CHECK(ages[7] == 4);  // A(7) = z(6) + 1
}

TEST_CASE("sum_age basics") {
  CHECK(sum_age({1, 2, 3, 4}, 1, 4) == 10);
  CHECK(sum_age({}, 0, 17) == 0);
  CHECK_THROWS_AS(sum_age({1, 2, 3}, 2, 2), std::logic_error);
}

TEST_CASE("sum_age matches an independent straight-loop summation") {
  RandomStream rng(9);
  const std::size_t streams = 3, horizon = 20;
  std::vector<std::int64_t> ages(streams * horizon);
  for (auto& a : ages) a = static_cast<std::int64_t>(rng.bits() % 50);
  std::int64_t expected = 0;
  for (std::size_t t = 0; t < horizon; ++t)
    for (std::size_t i = 0; i < streams; ++i) expected += ages[t * streams + i];
  CHECK(sum_age(ages, streams, horizon) == expected);
}

TEST_CASE("age never outruns the linear bound and respects the gap law") {
  RandomStream rng(11);
  for (int inst = 0; inst < 100; ++inst) {
    StreamState s;
    s.arrival = rng.bernoulli(0.5);
    s.queue_flag = s.arrival;
    for (int t = 1; t <= 50; ++t) {
      const SlotOutcome o =
          make_outcome(rng.bernoulli(0.5), s.queue_flag, rng.bernoulli(0.6));
      CHECK(o.delivered == (o.scheduled && s.queue_flag && o.channel_ok));
      if (o.delivered) CHECK(s.queue_flag);  // delivery requires occupancy
      CHECK(s.age >= s.system_time);         // A >= z at every boundary
      const bool a_next = rng.bernoulli(0.4);
      const std::int64_t age_next = step_age(s, o);
      const std::int64_t gap = age_next - s.age;
      CHECK((gap == 1 || gap == s.system_time + 1 - s.age));
      s.system_time = step_system_time(s, a_next);
      s.queue_flag = step_queue_flag(s, o, a_next);
      s.age = age_next;
    }
  }
}

TEST_CASE("never-scheduled stream ages linearly") {
  StreamState s;
  s.arrival = true;
  s.queue_flag = true;
  for (int t = 1; t <= 40; ++t) {
    CHECK(s.age == t);  // A(0) = 1 so A(t) = t exactly
    const SlotOutcome o = make_outcome(false, s.queue_flag, true);
    const std::int64_t age_next = step_age(s, o);
    s.system_time = step_system_time(s, false);
    s.queue_flag = step_queue_flag(s, o, false);
    s.age = age_next;
  }
}

// The linearized update must agree with the case split whenever the channel
// indicator is on.
TEST_CASE("linearized age identity on successful-channel slots") {
  RandomStream rng(13);
  for (int inst = 0; inst < 50; ++inst) {
    StreamState s;
    s.arrival = rng.bernoulli(0.5);
    s.queue_flag = s.arrival;
    for (int t = 1; t <= 40; ++t) {
      const bool x = rng.bernoulli(0.5);
      const bool c = rng.bernoulli(0.7);
      const SlotOutcome o = make_outcome(x, s.queue_flag, c);
      const std::int64_t age_next = step_age(s, o);
      if (c) {
        const std::int64_t xl = x ? 1 : 0;
        const std::int64_t bl = s.queue_flag ? 1 : 0;
        const std::int64_t linear = xl * bl * s.system_time +
                                    (1 - xl) * (1 - bl) * s.age + (1 - xl) * bl * s.age +
                                    xl * (1 - bl) * s.age + 1;
        CHECK(age_next == linear);
      }
      const bool a_next = rng.bernoulli(0.3);
      s.system_time = step_system_time(s, a_next);
      s.queue_flag = step_queue_flag(s, o, a_next);
      s.age = age_next;
    }
  }
}

TEST_CASE("single-queue state machine replays against the straight-line oracle") {
  RandomStream rng(17);
  for (int inst = 0; inst < 100; ++inst) {
    const int streams = 1 + static_cast<int>(rng.bits() % 4);
    const int horizon = 5 + static_cast<int>(rng.bits() % 46);
    oracle::SingleQueueInputs in;
    in.streams = streams;
    in.horizon = horizon;
    const std::size_t cells = static_cast<std::size_t>(streams * horizon);
    in.a.resize(cells);
    in.x.resize(cells);
    in.c.resize(cells);
    for (auto& v : in.a) v = rng.bernoulli(0.4) ? 1 : 0;
    for (auto& v : in.x) v = rng.bernoulli(0.5) ? 1 : 0;
    for (auto& v : in.c) v = rng.bernoulli(0.6) ? 1 : 0;
    const auto replay = oracle::replay_single_queue(in);

    for (int i = 0; i < streams; ++i) {
      StreamState s;
      s.arrival = in.get(in.a, 1, i) != 0;
      s.queue_flag = s.arrival;
      for (int t = 1; t <= horizon; ++t) {
        const std::size_t k = static_cast<std::size_t>((t - 1) * streams + i);
        const SlotOutcome o =
            make_outcome(in.get(in.x, t, i) != 0, s.queue_flag, in.get(in.c, t, i) != 0);
        REQUIRE(s.age == replay.age[k]);
        REQUIRE(s.system_time == replay.z[k]);
        REQUIRE((s.queue_flag ? 1 : 0) == replay.beta[k]);
        REQUIRE((o.delivered ? 1 : 0) == replay.delivered[k]);
        if (t == horizon) break;
        const bool a_next = in.get(in.a, t + 1, i) != 0;
        const std::int64_t age_next = step_age(s, o);
        s.system_time = step_system_time(s, a_next);
        s.queue_flag = step_queue_flag(s, o, a_next);
        s.age = age_next;
        s.arrival = a_next;
      }
    }
  }
}
