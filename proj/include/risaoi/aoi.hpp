#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "risaoi/rng.hpp"

namespace risaoi {

/// Per-stream AoI machine at the beginning of a slot. Ages and system times
/// are counted in slots.
struct StreamState {
  std::int64_t age = 1;          // A
  std::int64_t system_time = 0;  // z
  bool queue_flag = false;       // beta: freshest packet waiting
  bool arrival = false;          // a: arrival indicator for this slot
};

/// Resolution of one slot for one stream.
struct SlotOutcome {
  bool scheduled = false;   // x
  bool channel_ok = false;  // c: SNR cleared the threshold
  bool delivered = false;   // x AND beta AND c
};

inline SlotOutcome make_outcome(bool scheduled, bool queue_flag, bool channel_ok) {
  return SlotOutcome{scheduled, channel_ok, scheduled && queue_flag && channel_ok};
}

/// Bernoulli(lambda) arrival draw; lambda must lie in (0, 1].
inline bool draw_arrival(double lambda, RandomStream& rng) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("draw_arrival: lambda must be in (0, 1]");
  if (lambda >= 1.0) return true;
  return rng.bernoulli(lambda);
}

/// A(t+1): drop to z(t)+1 on delivery, grow by one otherwise.
inline std::int64_t step_age(const StreamState& s, const SlotOutcome& o) {
  return o.delivered ? s.system_time + 1 : s.age + 1;
}

/// z(t+1): reset on a fresh arrival, grow by one otherwise.
inline std::int64_t step_system_time(const StreamState& s, bool arrival_next) {
  return arrival_next ? 0 : s.system_time + 1;
}

/// beta(t+1): set by a fresh arrival, cleared by a delivery, held otherwise.
inline bool step_queue_flag(const StreamState& s, const SlotOutcome& o, bool arrival_next) {
  if (arrival_next) return true;
  if (o.delivered) return false;
  return s.queue_flag;
}

/// Total AoI over all streams and slots. `ages` is row-major [slot][stream].
inline std::int64_t sum_age(const std::vector<std::int64_t>& ages, std::size_t streams,
                            std::size_t horizon) {
  if (ages.size() != streams * horizon)
    throw std::logic_error("sum_age: trace does not cover streams x horizon");
  std::int64_t total = 0;
  for (std::int64_t a : ages) total += a;
  return total;
}

}  // namespace risaoi
