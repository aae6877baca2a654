#pragma once

#include <cstdint>
#include <vector>

#include "risaoi/aoi.hpp"
#include "risaoi/channel.hpp"
#include "risaoi/config.hpp"
#include "risaoi/mec.hpp"
#include "risaoi/policies.hpp"
#include "risaoi/trace.hpp"

namespace risaoi {

namespace detail {

// Slot order: arrivals are observed, the policy decides, the transmission
// outcome resolves, then state advances to the next slot.

inline EpisodeTrace run_single_queue(const SimulationConfig& cfg, std::uint64_t seed,
                                     PolicyKind kind, int processing_delay) {
  const int total = cfg.streams;
  const int horizon = cfg.horizon;
  PolicyContext ctx = make_policy_context(cfg);

  RandomStream geom_rng = RandomStream::derive(seed, Lane::geometry);
  const Geometry geometry = make_geometry(cfg, geom_rng);

  EpisodeTrace tr;
  tr.mec = false;
  tr.streams = total;
  tr.horizon = horizon;
  tr.elements = cfg.ris_elements;
  tr.seed = seed;
  tr.policy = to_string(kind);
  tr.records.resize(static_cast<std::size_t>(total) * static_cast<std::size_t>(horizon));

  std::vector<StreamState> states(static_cast<std::size_t>(total));
  std::vector<ProcessingBuffer> buffers(static_cast<std::size_t>(total));
  {
    RandomStream arr = RandomStream::derive(seed, Lane::arrivals, 1);
    for (int i = 0; i < total; ++i) {
      auto& s = states[static_cast<std::size_t>(i)];
      s.arrival = draw_arrival(cfg.lambda_of(i), arr);
      if (s.arrival) buffers[static_cast<std::size_t>(i)].on_arrival(processing_delay);
      s.queue_flag = buffers[static_cast<std::size_t>(i)].ready();
      s.age = 1;
      s.system_time = 0;
    }
  }

  RoundRobinCursor cursor;
  std::int64_t solves = 0, iters = 0, failures = 0;

  for (int t = 1; t <= horizon; ++t) {
    RandomStream chan_rng = RandomStream::derive(seed, Lane::channels, static_cast<std::uint64_t>(t));
    RandomStream rand_rng = RandomStream::derive(seed, Lane::randomization, static_cast<std::uint64_t>(t));
    const ChannelRealization ch = draw_channels(geometry, ctx.params, cfg.ris_elements, chan_rng);
    SchedulingDecision d = schedule(kind, states, ch, ctx, rand_rng, cursor);
    solves += d.sdp_solves;
    iters += d.sdp_iterations;
    failures += d.solver_failure ? 1 : 0;

    RandomStream arr_next = RandomStream::derive(seed, Lane::arrivals, static_cast<std::uint64_t>(t) + 1);
    for (int i = 0; i < total; ++i) {
      auto& s = states[static_cast<std::size_t>(i)];
      auto& buf = buffers[static_cast<std::size_t>(i)];
      const SlotOutcome outcome =
          make_outcome(d.x[static_cast<std::size_t>(i)] != 0, s.queue_flag,
                       d.per_stream_c[static_cast<std::size_t>(i)] != 0);

      SlotRecord& r = tr.records[static_cast<std::size_t>((t - 1) * total + i)];
      r.slot = t;
      r.stream = i;
      r.arrival = s.arrival ? 1 : 0;
      r.scheduled = outcome.scheduled ? 1 : 0;
      r.queue = s.queue_flag ? 1 : 0;
      r.system_time = s.system_time;
      r.snr = d.per_stream_snr[static_cast<std::size_t>(i)];
      r.channel_ok = outcome.channel_ok ? 1 : 0;
      r.delivered = outcome.delivered ? 1 : 0;
      r.age = s.age;

      if (t == horizon) continue;
      if (outcome.delivered) buf.on_delivered();
      buf.tick();
      const bool arrival_next = draw_arrival(cfg.lambda_of(i), arr_next);
      if (arrival_next) buf.on_arrival(processing_delay);
      s.age = step_age(s, outcome);
      s.system_time = step_system_time(s, arrival_next);
      s.queue_flag = buf.ready();
      s.arrival = arrival_next;
    }
  }

  tr.summary.sdp_solves = solves;
  tr.summary.sdp_iters_mean = solves > 0 ? static_cast<double>(iters) / static_cast<double>(solves) : 0.0;
  tr.summary.solver_failures = failures;
  finalize_summary(tr);
  return tr;
}

inline EpisodeTrace run_mec(const SimulationConfig& cfg, std::uint64_t seed, PolicyKind kind) {
  const int total = cfg.streams;
  const int horizon = cfg.horizon;
  MecPolicyContext ctx{make_policy_context(cfg), cfg.effective_mec_capacity(), kind};

  RandomStream geom_rng = RandomStream::derive(seed, Lane::geometry);
  const Geometry geometry = make_geometry(cfg, geom_rng);

  EpisodeTrace tr;
  tr.mec = true;
  tr.streams = total;
  tr.horizon = horizon;
  tr.elements = cfg.ris_elements;
  tr.seed = seed;
  tr.policy = to_string(kind);
  tr.records.resize(static_cast<std::size_t>(total) * static_cast<std::size_t>(horizon));

  std::vector<MecStreamState> states(static_cast<std::size_t>(total));
  {
    RandomStream arr = RandomStream::derive(seed, Lane::arrivals, 1);
    for (int i = 0; i < total; ++i) {
      auto& s = states[static_cast<std::size_t>(i)];
      s.arrival = draw_arrival(cfg.lambda_of(i), arr);
      s.in_queue = s.arrival;
    }
  }

  RoundRobinCursor cursor;
  std::int64_t solves = 0, iters = 0, failures = 0;

  for (int t = 1; t <= horizon; ++t) {
    RandomStream chan_rng = RandomStream::derive(seed, Lane::channels, static_cast<std::uint64_t>(t));
    RandomStream rand_rng = RandomStream::derive(seed, Lane::randomization, static_cast<std::uint64_t>(t));
    const ChannelRealization ch = draw_channels(geometry, ctx.base.params, cfg.ris_elements, chan_rng);
    MecDecision d = schedule_mec(states, ch, ctx, rand_rng, cursor);
    solves += d.sdp_solves;
    iters += d.sdp_iterations;
    failures += d.solver_failure ? 1 : 0;

    RandomStream arr_next = RandomStream::derive(seed, Lane::arrivals, static_cast<std::uint64_t>(t) + 1);
    for (int i = 0; i < total; ++i) {
      auto& s = states[static_cast<std::size_t>(i)];
      const bool in_x = d.in_x[static_cast<std::size_t>(i)] != 0;
      const bool out_x = d.out_x[static_cast<std::size_t>(i)] != 0;
      const bool c = d.per_stream_c[static_cast<std::size_t>(i)] != 0;
      const bool delivered = out_x && s.out_queue && c;

      // Slot-t timing state; at t = 1 the initialized zeros stand.
      if (t > 1) {
        const InterarrivalStep ia = step_interarrival(s, in_x, t);
        s.interarrival = ia.interarrival;
        s.last_in_slot = ia.last_in_slot;
        s.system_time = step_mec_system_time(s, s.arrival, s.out_queue, s.interarrival);
        s.out_system_time = step_out_system_time(s, s.system_time, s.processed_arrival);
      } else if (in_x) {
        s.last_in_slot = 1;
      }

      SlotRecord& r = tr.records[static_cast<std::size_t>((t - 1) * total + i)];
      r.slot = t;
      r.stream = i;
      r.arrival = s.arrival ? 1 : 0;
      r.scheduled = in_x ? 1 : 0;
      r.queue = s.in_queue ? 1 : 0;
      r.system_time = s.system_time;
      r.snr = d.per_stream_snr[static_cast<std::size_t>(i)];
      r.channel_ok = c ? 1 : 0;
      r.delivered = delivered ? 1 : 0;
      r.age = s.age;
      r.out_scheduled = out_x ? 1 : 0;
      r.out_queue = s.out_queue ? 1 : 0;
      r.out_system_time = s.out_system_time;

      if (t == horizon) continue;
      const bool arrival_next = draw_arrival(cfg.lambda_of(i), arr_next);
      s.age = step_mec_age(s, delivered);
      const bool processed_next = step_processed_arrival(in_x);
      s.out_queue_prev = s.out_queue;
      s.out_queue = processed_next ? true : (delivered ? false : s.out_queue);
      s.in_queue = arrival_next ? true : (s.in_queue && !in_x);
      s.arrival = arrival_next;
      s.processed_arrival = processed_next;
      s.in_sched_prev = in_x;
      s.out_sched_prev = out_x;
      s.out_delivered_prev = delivered;
    }
  }

  tr.summary.sdp_solves = solves;
  tr.summary.sdp_iters_mean = solves > 0 ? static_cast<double>(iters) / static_cast<double>(solves) : 0.0;
  tr.summary.solver_failures = failures;
  finalize_summary(tr);
  return tr;
}

}  // namespace detail

/// Run one seeded episode under the configured policy. Deterministic in
/// (config, seed); arrivals, channels and randomization use separate lanes so
/// matched-seed runs of different policies see identical randomness.
inline EpisodeTrace run_episode(const SimulationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const PolicyKind kind = policy_from_name(cfg.policy);
  if (cfg.mec) return detail::run_mec(cfg, seed, kind);
  return detail::run_single_queue(cfg, seed, kind, cfg.processing_delay);
}

}  // namespace risaoi
