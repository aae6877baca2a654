#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "risaoi/policies.hpp"

namespace risaoi {

/// Per-stream state of the two-queue MEC pipeline at the beginning of a slot.
/// Hatted quantities refer to the out-queue (processed packets).
struct MecStreamState {
  std::int64_t age = 1;             // A
  std::int64_t system_time = 0;     // z
  std::int64_t out_system_time = 0; // z-hat
  std::int64_t interarrival = 0;    // I
  std::int64_t last_in_slot = 0;    // slot of the most recent in-schedule, 0 = none
  bool in_queue = false;            // beta
  bool out_queue = false;           // beta-hat
  bool out_queue_prev = false;      // beta-hat at t-1
  bool arrival = false;             // a(t)
  bool processed_arrival = false;   // a-hat(t)
  bool in_sched_prev = false;       // x(t-1)
  bool out_sched_prev = false;      // x-hat(t-1)
  bool out_delivered_prev = false;  // x-hat(t-1) c(t-1)
};

/// One-slot MEC processing: a packet scheduled to the server in slot t
/// arrives to the out-queue in slot t+1.
inline bool step_processed_arrival(bool in_scheduled_now) { return in_scheduled_now; }

struct InterarrivalStep {
  std::int64_t interarrival = 0;
  std::int64_t last_in_slot = 0;
};

/// Inter-arrival clock between consecutive in-schedules. It resets to zero
/// (with the schedule history cleared) when the stream has no packet anywhere
/// in the pipeline, or when a delivery just emptied the out-queue while a
/// fresh packet waits; it takes the gap between the two most recent
/// in-schedule slots when the stream is in-scheduled now; otherwise it holds.
inline InterarrivalStep step_interarrival(const MecStreamState& s, bool in_sched_now,
                                          std::int64_t slot) {
  InterarrivalStep out{s.interarrival, s.last_in_slot};
  const bool zero = (!s.in_queue && !s.out_queue) ||
                    (s.in_queue && !s.out_queue && s.out_sched_prev);
  if (zero) {
    out.interarrival = 0;
    out.last_in_slot = 0;
  }
  if (in_sched_now) {
    if (!zero) out.interarrival = slot - out.last_in_slot;
    out.last_in_slot = slot;
  }
  return out;
}

/// System time of the freshest unprocessed packet. Resets on an arrival into
/// an empty pipeline tail; drops by the inter-arrival gap when the clock
/// re-bases onto the next packet (a processed packet lands in an occupied
/// out-queue, or a delivery just left the pipeline); grows by one otherwise.
inline std::int64_t step_mec_system_time(const MecStreamState& s, bool arrival_now,
                                         bool out_queue_now, std::int64_t interarrival_now) {
  std::int64_t z;
  if (arrival_now && !out_queue_now) {
    z = 0;
  } else if ((s.out_queue_prev && s.in_sched_prev) || s.out_delivered_prev) {
    // a-hat(t) = x(t-1): processed arrival into an occupied out-queue
    z = s.system_time + 1 - interarrival_now;
  } else {
    z = s.system_time + 1;
  }
  if (z < 0) throw std::logic_error("step_mec_system_time: negative system time");
  return z;
}

/// Out-queue system time: synchronizes to z when a processed packet arrives,
/// otherwise grows by one.
inline std::int64_t step_out_system_time(const MecStreamState& s, std::int64_t z_now,
                                         bool processed_arrival_now) {
  return processed_arrival_now ? z_now : s.out_system_time + 1;
}

/// Age recursion of the pipeline: a successful out-queue delivery drops the
/// age to the delivered packet's total system time plus one.
inline std::int64_t step_mec_age(const MecStreamState& s, bool out_delivered) {
  return out_delivered ? s.out_system_time + 1 : s.age + 1;
}

/// Joint in/out scheduling decision for one slot.
struct MecDecision {
  std::vector<std::uint8_t> in_x;
  std::vector<std::uint8_t> out_x;
  PhaseProfile profile;
  std::vector<double> per_stream_snr;
  std::vector<std::uint8_t> per_stream_c;
  int sdp_solves = 0;
  long long sdp_iterations = 0;
  bool solver_failure = false;
};

struct MecPolicyContext {
  PolicyContext base;
  int mec_capacity = 1;
  PolicyKind out_policy = PolicyKind::alg1;
};

/// In-queue: oldest streams with a waiting packet, up to the server capacity.
/// Out-queue: the configured base policy applied to the out-queue flags, with
/// the schedule masked so that only occupied out-queues transmit.
inline MecDecision schedule_mec(const std::vector<MecStreamState>& states,
                                const ChannelRealization& ch, const MecPolicyContext& ctx,
                                RandomStream& rng, RoundRobinCursor& cursor) {
  const int total = static_cast<int>(states.size());
  MecDecision d;
  d.in_x.assign(static_cast<std::size_t>(total), 0);

  // In-queue selection by descending age, lowest index on ties.
  std::vector<int> waiting;
  for (int i = 0; i < total; ++i)
    if (states[static_cast<std::size_t>(i)].in_queue) waiting.push_back(i);
  std::stable_sort(waiting.begin(), waiting.end(), [&](int a, int b) {
    return states[static_cast<std::size_t>(a)].age > states[static_cast<std::size_t>(b)].age;
  });
  for (int j = 0; j < static_cast<int>(waiting.size()) && j < ctx.mec_capacity; ++j)
    d.in_x[static_cast<std::size_t>(waiting[static_cast<std::size_t>(j)])] = 1;

  // Out-queue decision through the base policy on pseudo single-queue states.
  std::vector<StreamState> pseudo(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    pseudo[static_cast<std::size_t>(i)].age = states[static_cast<std::size_t>(i)].age;
    pseudo[static_cast<std::size_t>(i)].system_time = states[static_cast<std::size_t>(i)].out_system_time;
    pseudo[static_cast<std::size_t>(i)].queue_flag = states[static_cast<std::size_t>(i)].out_queue;
    pseudo[static_cast<std::size_t>(i)].arrival = states[static_cast<std::size_t>(i)].processed_arrival;
  }
  SchedulingDecision base = schedule(ctx.out_policy, pseudo, ch, ctx.base, rng, cursor);
  d.out_x = std::move(base.x);
  for (int i = 0; i < total; ++i)
    if (!states[static_cast<std::size_t>(i)].out_queue) d.out_x[static_cast<std::size_t>(i)] = 0;
  d.profile = std::move(base.profile);
  d.per_stream_snr = std::move(base.per_stream_snr);
  d.per_stream_c = std::move(base.per_stream_c);
  d.sdp_solves = base.sdp_solves;
  d.sdp_iterations = base.sdp_iterations;
  d.solver_failure = base.solver_failure;
  return d;
}

/// Single-packet buffer with a local processing countdown; the packet becomes
/// transmittable once processing completes. With zero delay this is exactly
/// the plain single-queue model.
struct ProcessingBuffer {
  bool held = false;
  int remaining = 0;

  bool ready() const { return held && remaining == 0; }

  void on_arrival(int delay) {
    held = true;
    remaining = delay;
  }
  void on_delivered() { held = false; }
  void tick() {
    if (held && remaining > 0) --remaining;
  }
};

}  // namespace risaoi
