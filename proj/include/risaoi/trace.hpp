#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

#include "risaoi/config.hpp"

namespace risaoi {

/// One (slot, stream) row of an episode trace. For MEC episodes, `scheduled`
/// is the in-queue decision and the out_* fields describe the out-queue.
struct SlotRecord {
  std::int32_t slot = 0;    // 1-based
  std::int32_t stream = 0;  // 0-based
  std::uint8_t arrival = 0;
  std::uint8_t scheduled = 0;
  std::uint8_t queue = 0;
  std::int64_t system_time = 0;
  double snr = 0.0;  // linear
  std::uint8_t channel_ok = 0;
  std::uint8_t delivered = 0;
  std::int64_t age = 0;
  // MEC columns
  std::uint8_t out_scheduled = 0;
  std::uint8_t out_queue = 0;
  std::int64_t out_system_time = 0;
};

struct EpisodeSummary {
  std::int64_t sum_aoi = 0;
  double mean_age = 0.0;
  std::vector<double> per_stream_mean_age;
  std::int64_t deliveries = 0;
  std::int64_t sdp_solves = 0;
  double sdp_iters_mean = 0.0;
  std::int64_t solver_failures = 0;
};

struct EpisodeTrace {
  bool mec = false;
  std::int32_t streams = 0;
  std::int32_t horizon = 0;
  std::int32_t elements = 0;
  std::uint64_t seed = 0;
  std::string policy;
  std::vector<SlotRecord> records;  // slot-major, stream-minor
  EpisodeSummary summary;

  const SlotRecord& at(std::int32_t slot, std::int32_t stream) const {
    return records[static_cast<std::size_t>((slot - 1) * streams + stream)];
  }
};

/// Fixed decimal formatting used in every output file, so that identical
/// numbers always serialize to identical bytes.
inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::string(buf);
}

inline void finalize_summary(EpisodeTrace& tr) {
  std::int64_t sum = 0;
  std::int64_t deliveries = 0;
  std::vector<std::int64_t> per_stream(static_cast<std::size_t>(tr.streams), 0);
  for (const auto& r : tr.records) {
    sum += r.age;
    deliveries += r.delivered;
    per_stream[static_cast<std::size_t>(r.stream)] += r.age;
  }
  tr.summary.sum_aoi = sum;
  tr.summary.deliveries = deliveries;
  const double cells = static_cast<double>(tr.streams) * static_cast<double>(tr.horizon);
  tr.summary.mean_age = cells > 0 ? static_cast<double>(sum) / cells : 0.0;
  tr.summary.per_stream_mean_age.resize(static_cast<std::size_t>(tr.streams));
  for (std::int32_t i = 0; i < tr.streams; ++i)
    tr.summary.per_stream_mean_age[static_cast<std::size_t>(i)] =
        tr.horizon > 0 ? static_cast<double>(per_stream[static_cast<std::size_t>(i)]) /
                             static_cast<double>(tr.horizon)
                       : 0.0;
}

inline nlohmann::ordered_json trace_to_json(const EpisodeTrace& tr) {
  nlohmann::ordered_json j;
  j["schema"] = "risaoi-trace-v1";
  j["policy"] = tr.policy;
  j["mec"] = tr.mec;
  j["streams"] = tr.streams;
  j["horizon"] = tr.horizon;
  j["elements"] = tr.elements;
  j["seed"] = tr.seed;
  nlohmann::ordered_json slots = nlohmann::ordered_json::array();
  for (std::int32_t t = 1; t <= tr.horizon; ++t) {
    nlohmann::ordered_json row;
    row["t"] = t;
    auto col = [&](auto getter) {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (std::int32_t i = 0; i < tr.streams; ++i) arr.push_back(getter(tr.at(t, i)));
      return arr;
    };
    row["a"] = col([](const SlotRecord& r) { return static_cast<int>(r.arrival); });
    row["x"] = col([](const SlotRecord& r) { return static_cast<int>(r.scheduled); });
    row["beta"] = col([](const SlotRecord& r) { return static_cast<int>(r.queue); });
    row["z"] = col([](const SlotRecord& r) { return r.system_time; });
    if (tr.mec) {
      row["x_out"] = col([](const SlotRecord& r) { return static_cast<int>(r.out_scheduled); });
      row["beta_out"] = col([](const SlotRecord& r) { return static_cast<int>(r.out_queue); });
      row["z_out"] = col([](const SlotRecord& r) { return r.out_system_time; });
    }
    row["snr"] = col([](const SlotRecord& r) { return format_number(r.snr); });
    row["c"] = col([](const SlotRecord& r) { return static_cast<int>(r.channel_ok); });
    row["delivered"] = col([](const SlotRecord& r) { return static_cast<int>(r.delivered); });
    row["age"] = col([](const SlotRecord& r) { return r.age; });
    slots.push_back(std::move(row));
  }
  j["slots"] = std::move(slots);
  nlohmann::ordered_json per_stream = nlohmann::ordered_json::array();
  for (double m : tr.summary.per_stream_mean_age) per_stream.push_back(format_number(m));
  j["summary"] = {{"sum_aoi", tr.summary.sum_aoi},
                  {"mean_age", format_number(tr.summary.mean_age)},
                  {"per_stream_mean_age", std::move(per_stream)},
                  {"deliveries", tr.summary.deliveries},
                  {"sdp_solves", tr.summary.sdp_solves},
                  {"sdp_iters_mean", format_number(tr.summary.sdp_iters_mean)},
                  {"solver_failures", tr.summary.solver_failures}};
  return j;
}

}  // namespace risaoi
