#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "risaoi/episode.hpp"
#include "risaoi/trace.hpp"

namespace risaoi {

/// Run fn(0..count-1) on the given number of worker threads. Results must be
/// written to pre-sized slots; the loop itself carries no shared state.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      fn(i);
    }
  };
  std::vector<std::thread> pool;
  const int n = std::min<int>(threads, static_cast<int>(count));
  pool.reserve(static_cast<std::size_t>(n));
  for (int w = 0; w < n; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

inline int resolve_threads(int configured) {
  if (configured > 0) return configured;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// ---------------------------------------------------------------------------
// Element sweep (Fig. 4 protocol)
// ---------------------------------------------------------------------------

struct SweepRow {
  std::string policy;
  int elements = 0;
  std::uint64_t seed = 0;
  EpisodeSummary summary;
};

inline std::vector<std::uint64_t> make_seeds(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) seeds[static_cast<std::size_t>(k)] = base + static_cast<std::uint64_t>(k);
  return seeds;
}

/// One episode per (policy, F, seed); rows come back in canonical order
/// independent of the thread count.
inline std::vector<SweepRow> sweep_elements(const SimulationConfig& base,
                                            const std::vector<int>& f_values,
                                            const std::vector<std::uint64_t>& seeds,
                                            const std::vector<PolicyKind>& policies) {
  if (f_values.empty()) throw std::invalid_argument("sweep_elements: empty F list");
  struct Task {
    PolicyKind policy;
    int elements;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (PolicyKind p : policies)
    for (int f : f_values)
      for (std::uint64_t s : seeds) tasks.push_back({p, f, s});
  std::vector<SweepRow> rows(tasks.size());
  parallel_for(tasks.size(), resolve_threads(base.threads), [&](std::size_t k) {
    SimulationConfig cfg = base;
    cfg.policy = to_string(tasks[k].policy);
    cfg.ris_elements = tasks[k].elements;
    const EpisodeTrace tr = run_episode(cfg, tasks[k].seed);
    rows[k] = SweepRow{cfg.policy, tasks[k].elements, tasks[k].seed, tr.summary};
  });
  return rows;
}

struct SweepAggregate {
  std::string policy;
  int elements = 0;
  int count = 0;
  double mean_sum_aoi = 0.0;
  double std_sum_aoi = 0.0;
  double se_sum_aoi = 0.0;
  double mean_deliveries = 0.0;
  double mean_sdp_iters = 0.0;
};

inline std::vector<SweepAggregate> aggregate_sweep(const std::vector<SweepRow>& rows) {
  std::map<std::pair<std::string, int>, std::vector<const SweepRow*>> groups;
  for (const auto& r : rows) groups[{r.policy, r.elements}].push_back(&r);
  std::vector<SweepAggregate> out;
  for (const auto& [key, members] : groups) {
    SweepAggregate a;
    a.policy = key.first;
    a.elements = key.second;
    a.count = static_cast<int>(members.size());
    double sum = 0.0, sum_del = 0.0, sum_it = 0.0;
    for (const auto* m : members) {
      sum += static_cast<double>(m->summary.sum_aoi);
      sum_del += static_cast<double>(m->summary.deliveries);
      sum_it += m->summary.sdp_iters_mean;
    }
    a.mean_sum_aoi = sum / a.count;
    a.mean_deliveries = sum_del / a.count;
    a.mean_sdp_iters = sum_it / a.count;
    double ss = 0.0;
    for (const auto* m : members) {
      const double d = static_cast<double>(m->summary.sum_aoi) - a.mean_sum_aoi;
      ss += d * d;
    }
    a.std_sum_aoi = a.count > 1 ? std::sqrt(ss / (a.count - 1)) : 0.0;
    a.se_sum_aoi = a.count > 1 ? a.std_sum_aoi / std::sqrt(static_cast<double>(a.count)) : 0.0;
    out.push_back(std::move(a));
  }
  return out;
}

inline void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema=risaoi-sweep-v1\n";
  out << "policy,F,seed,sum_aoi,mean_age,deliveries,sdp_iters_mean\n";
  for (const auto& r : rows) {
    out << r.policy << ',' << r.elements << ',' << r.seed << ',' << r.summary.sum_aoi << ','
        << format_number(r.summary.mean_age) << ',' << r.summary.deliveries << ','
        << format_number(r.summary.sdp_iters_mean) << '\n';
  }
}

inline void write_sweep_aggregate_csv(const std::string& path,
                                      const std::vector<SweepAggregate>& aggs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema=risaoi-sweep-agg-v1\n";
  out << "policy,F,n,mean_sum_aoi,std_sum_aoi,se_sum_aoi,mean_deliveries,mean_sdp_iters\n";
  for (const auto& a : aggs) {
    out << a.policy << ',' << a.elements << ',' << a.count << ',' << format_number(a.mean_sum_aoi)
        << ',' << format_number(a.std_sum_aoi) << ',' << format_number(a.se_sum_aoi) << ','
        << format_number(a.mean_deliveries) << ',' << format_number(a.mean_sdp_iters) << '\n';
  }
}

inline std::string aggregate_path_for(const std::string& raw_path) {
  const auto dot = raw_path.find_last_of('.');
  const auto slash = raw_path.find_last_of("/\\");
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return raw_path + "_agg.csv";
  return raw_path.substr(0, dot) + "_agg" + raw_path.substr(dot);
}

// ---------------------------------------------------------------------------
// MEC comparison (Fig. 6 protocol)
// ---------------------------------------------------------------------------

struct MecCompareRow {
  std::string policy;
  std::string variant;  // "mec" | "local"
  int elements = 0;
  double gamma_db = 0.0;
  std::uint64_t seed = 0;
  EpisodeSummary summary;
};

/// Matched-seed pairs: the MEC pipeline against the local-processing
/// baseline (single queue whose packets wait `local_delay` slots before
/// becoming transmittable).
inline std::vector<MecCompareRow> compare_mec(const SimulationConfig& base,
                                              const std::vector<int>& f_values,
                                              const std::vector<double>& gamma_values,
                                              const std::vector<std::uint64_t>& seeds) {
  if (f_values.empty()) throw std::invalid_argument("compare_mec: empty F list");
  if (gamma_values.empty()) throw std::invalid_argument("compare_mec: empty gamma list");
  struct Task {
    bool mec;
    int elements;
    double gamma_db;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (double g : gamma_values)
    for (int f : f_values)
      for (std::uint64_t s : seeds) {
        tasks.push_back({true, f, g, s});
        tasks.push_back({false, f, g, s});
      }
  std::vector<MecCompareRow> rows(tasks.size());
  parallel_for(tasks.size(), resolve_threads(base.threads), [&](std::size_t k) {
    SimulationConfig cfg = base;
    cfg.ris_elements = tasks[k].elements;
    cfg.gamma_th_db = tasks[k].gamma_db;
    cfg.mec = tasks[k].mec;
    cfg.processing_delay = tasks[k].mec ? 0 : cfg.local_delay;
    const EpisodeTrace tr = run_episode(cfg, tasks[k].seed);
    rows[k] = MecCompareRow{cfg.policy, tasks[k].mec ? "mec" : "local", tasks[k].elements,
                            tasks[k].gamma_db, tasks[k].seed, tr.summary};
  });
  return rows;
}

struct MecAggregate {
  std::string policy;
  int elements = 0;
  double gamma_db = 0.0;
  int count = 0;
  double mean_mec = 0.0;
  double mean_local = 0.0;
  double reduction = 0.0;  // 1 - mec / local
};

inline std::vector<MecAggregate> aggregate_mec(const std::vector<MecCompareRow>& rows) {
  std::map<std::tuple<std::string, int, double>, MecAggregate> groups;
  std::map<std::tuple<std::string, int, double>, std::pair<int, int>> counts;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.policy, r.elements, r.gamma_db);
    auto& a = groups[key];
    a.policy = r.policy;
    a.elements = r.elements;
    a.gamma_db = r.gamma_db;
    if (r.variant == "mec") {
      a.mean_mec += static_cast<double>(r.summary.sum_aoi);
      counts[key].first += 1;
    } else {
      a.mean_local += static_cast<double>(r.summary.sum_aoi);
      counts[key].second += 1;
    }
  }
  std::vector<MecAggregate> out;
  for (auto& [key, a] : groups) {
    const auto& c = counts[key];
    if (c.first > 0) a.mean_mec /= c.first;
    if (c.second > 0) a.mean_local /= c.second;
    a.count = c.first;
    a.reduction = a.mean_local > 0.0 ? 1.0 - a.mean_mec / a.mean_local : 0.0;
    out.push_back(a);
  }
  return out;
}

inline void write_mec_csv(const std::string& path, const std::vector<MecCompareRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema=risaoi-mec-v1\n";
  out << "policy,variant,F,gamma_th_db,seed,sum_aoi,mean_age,deliveries,sdp_iters_mean\n";
  for (const auto& r : rows) {
    out << r.policy << ',' << r.variant << ',' << r.elements << ',' << format_number(r.gamma_db)
        << ',' << r.seed << ',' << r.summary.sum_aoi << ',' << format_number(r.summary.mean_age)
        << ',' << r.summary.deliveries << ',' << format_number(r.summary.sdp_iters_mean) << '\n';
  }
}

inline void write_mec_aggregate_csv(const std::string& path, const std::vector<MecAggregate>& aggs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema=risaoi-mec-agg-v1\n";
  out << "policy,F,gamma_th_db,n,mean_sum_aoi_mec,mean_sum_aoi_local,reduction\n";
  for (const auto& a : aggs) {
    out << a.policy << ',' << a.elements << ',' << format_number(a.gamma_db) << ',' << a.count
        << ',' << format_number(a.mean_mec) << ',' << format_number(a.mean_local) << ','
        << format_number(a.reduction) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Age evolution (Fig. 5 protocol)
// ---------------------------------------------------------------------------

struct EvolutionRow {
  std::string policy;
  std::uint64_t seed = 0;
  int slot = 0;
  int stream = 0;
  std::int64_t age = 0;
};

/// Per-slot age series of the chosen streams under every policy, matched
/// seeds. Streams are 1-based in the subset argument.
inline std::vector<EvolutionRow> trace_evolution(const SimulationConfig& base,
                                                 const std::vector<int>& stream_subset,
                                                 std::uint64_t seed) {
  for (int s : stream_subset)
    if (s < 1 || s > base.streams)
      throw std::invalid_argument("trace_evolution: stream index outside 1..I");
  std::vector<EvolutionRow> rows;
  for (PolicyKind p : all_policies()) {
    SimulationConfig cfg = base;
    cfg.policy = to_string(p);
    const EpisodeTrace tr = run_episode(cfg, seed);
    for (int t = 1; t <= cfg.horizon; ++t)
      for (int s : stream_subset)
        rows.push_back({cfg.policy, seed, t, s, tr.at(t, s - 1).age});
  }
  return rows;
}

inline void write_evolution_csv(const std::string& path, const std::vector<EvolutionRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "# schema=risaoi-evolution-v1\n";
  out << "policy,seed,slot,stream,age\n";
  for (const auto& r : rows)
    out << r.policy << ',' << r.seed << ',' << r.slot << ',' << r.stream << ',' << r.age << '\n';
}

}  // namespace risaoi
