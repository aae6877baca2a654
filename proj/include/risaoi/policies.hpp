#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "risaoi/aoi.hpp"
#include "risaoi/channel.hpp"
#include "risaoi/config.hpp"
#include "risaoi/sdr.hpp"

namespace risaoi {

/// One slot's scheduling output: the x vector (sum <= N), the RIS profile the
/// decision was made for, and the realized per-stream link quality under that
/// profile.
struct SchedulingDecision {
  std::vector<std::uint8_t> x;
  PhaseProfile profile;
  std::optional<std::vector<double>> relaxed_scores;  // alg1 only
  std::vector<double> per_stream_snr;                 // linear
  std::vector<std::uint8_t> per_stream_c;             // snr >= gamma_th
  int sdp_solves = 0;
  long long sdp_iterations = 0;
  bool solver_failure = false;
};

/// Linear-unit inputs a policy needs for one slot.
struct PolicyContext {
  int channels = 1;           // N
  double gamma_th = 1.0;      // linear
  ChannelParams params;
  SdrEngineOptions engine;
};

inline PolicyContext make_policy_context(const SimulationConfig& cfg) {
  return PolicyContext{cfg.channels, cfg.gamma_th_linear(), cfg.channel_params(), cfg.engine_options()};
}

/// Episode-local rotation state for the round-robin policy.
class RoundRobinCursor {
 public:
  std::vector<int> take(int count, int streams) {
    std::vector<int> out;
    const int k = std::min(count, streams);
    out.reserve(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) out.push_back((next_ + j) % streams);
    next_ = (next_ + count) % streams;
    return out;
  }
  int position() const { return next_; }

 private:
  int next_ = 0;
};

namespace detail {

inline void fill_link_quality(SchedulingDecision& d, const ChannelRealization& ch,
                              const PolicyContext& ctx, bool direct_only) {
  const std::size_t n = ch.streams();
  d.per_stream_snr.resize(n);
  d.per_stream_c.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.per_stream_snr[i] = direct_only ? snr_direct(ch, i, ctx.params) : snr(ch, d.profile, i, ctx.params);
    d.per_stream_c[i] = d.per_stream_snr[i] >= ctx.gamma_th ? 1 : 0;
  }
}

/// Stream indices ordered by age descending, index ascending.
inline std::vector<int> age_order(const std::vector<StreamState>& states) {
  std::vector<int> order(states.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return states[static_cast<std::size_t>(a)].age > states[static_cast<std::size_t>(b)].age;
  });
  return order;
}

inline std::vector<GainTarget> all_targets(const ChannelRealization& ch) {
  std::vector<GainTarget> t;
  t.reserve(ch.streams());
  for (std::size_t i = 0; i < ch.streams(); ++i) t.push_back(make_gain_target(ch, i));
  return t;
}

}  // namespace detail

/// Proposed joint scheduling + phase-shift policy: relax the scheduling
/// variables jointly with the lifted matrix, keep the top-N queue-holding
/// streams by relaxed score, certify them with the per-stream SNR feasibility
/// problem (dropping the weakest stream until feasible), randomize the final
/// relaxation with age weights, and schedule only streams whose realized SNR
/// clears the threshold.
inline SchedulingDecision schedule_alg1(const std::vector<StreamState>& states,
                                        const ChannelRealization& ch, const PolicyContext& ctx,
                                        RandomStream& rng) {
  const int total = static_cast<int>(states.size());
  const Eigen::Index dim = ch.elements() + 1;
  SchedulingDecision d;
  d.x.assign(static_cast<std::size_t>(total), 0);
  d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));
  d.relaxed_scores = std::vector<double>(static_cast<std::size_t>(total), 0.0);

  const double floor_gain = ctx.gamma_th * ctx.params.noise_power / ctx.params.tx_power;

  std::vector<bool> has_packet(static_cast<std::size_t>(total));
  std::vector<double> ages(static_cast<std::size_t>(total));
  bool any_packet = false;
  for (int i = 0; i < total; ++i) {
    has_packet[static_cast<std::size_t>(i)] = states[static_cast<std::size_t>(i)].queue_flag;
    ages[static_cast<std::size_t>(i)] = static_cast<double>(states[static_cast<std::size_t>(i)].age);
    any_packet = any_packet || states[static_cast<std::size_t>(i)].queue_flag;
  }

  std::vector<int> kept;
  try {
    if (any_packet) {
      std::vector<GainTarget> targets = detail::all_targets(ch);
      Op2Result op2 = solve_scheduling_relaxation(targets, has_packet, ages, floor_gain,
                                                  ctx.channels, dim, ctx.engine, rng);
      d.relaxed_scores = op2.scores;
      d.sdp_solves += op2.solve.solves;
      d.sdp_iterations += op2.solve.iterations;

      std::vector<int> ranked;
      for (int i = 0; i < total; ++i)
        if (has_packet[static_cast<std::size_t>(i)]) ranked.push_back(i);
      std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return op2.scores[static_cast<std::size_t>(a)] > op2.scores[static_cast<std::size_t>(b)];
      });
      if (static_cast<int>(ranked.size()) > ctx.channels) ranked.resize(static_cast<std::size_t>(ctx.channels));
      kept = ranked;

      GainSolve feasibility_solve;
      bool have_solve = false;
      while (!kept.empty()) {
        std::vector<GainTarget> kt;
        for (int i : kept) kt.push_back(targets[static_cast<std::size_t>(i)]);
        MaxMinResult mm = solve_maxmin_gain(kt, dim, ctx.engine, rng);
        d.sdp_solves += mm.solve.solves;
        d.sdp_iterations += mm.solve.iterations;
        if (mm.min_gain >= floor_gain * (1.0 - 1e-9)) {
          feasibility_solve = std::move(mm.solve);
          have_solve = true;
          break;
        }
        // Drop the stream with the lowest relaxed score (largest index on ties).
        int drop = 0;
        for (int j = 1; j < static_cast<int>(kept.size()); ++j) {
          const double sj = op2.scores[static_cast<std::size_t>(kept[static_cast<std::size_t>(j)])];
          const double sd = op2.scores[static_cast<std::size_t>(kept[static_cast<std::size_t>(drop)])];
          if (sj <= sd) drop = j;
        }
        kept.erase(kept.begin() + drop);
      }

      if (have_solve && !kept.empty()) {
        std::vector<GainTarget> rt;
        for (int i : kept) {
          GainTarget t = targets[static_cast<std::size_t>(i)];
          t.weight = ages[static_cast<std::size_t>(i)];
          rt.push_back(std::move(t));
        }
        RandomizationResult rr = randomize(feasibility_solve, rt, ctx.engine.samples, rng);
        d.profile = std::move(rr.profile);
      }
    }
  } catch (const std::exception&) {
    d.solver_failure = true;
    kept.clear();
    d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));
  }

  detail::fill_link_quality(d, ch, ctx, false);
  for (int i : kept)
    if (d.per_stream_c[static_cast<std::size_t>(i)]) d.x[static_cast<std::size_t>(i)] = 1;
  return d;
}

/// Channel-first policy: one age-weighted sum-gain relaxation over all
/// streams, then greedy scheduling of the oldest streams whose channel
/// actually cleared the threshold, regardless of queue occupancy.
inline SchedulingDecision schedule_alg2(const std::vector<StreamState>& states,
                                        const ChannelRealization& ch, const PolicyContext& ctx,
                                        RandomStream& rng) {
  const int total = static_cast<int>(states.size());
  SchedulingDecision d;
  d.x.assign(static_cast<std::size_t>(total), 0);
  d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));

  try {
    std::vector<GainTarget> targets = detail::all_targets(ch);
    for (int i = 0; i < total; ++i)
      targets[static_cast<std::size_t>(i)].weight =
          static_cast<double>(states[static_cast<std::size_t>(i)].age);
    GainSolve g = solve_weighted_gain(targets, ch.elements() + 1, ctx.engine, rng);
    d.sdp_solves += g.solves;
    d.sdp_iterations += g.iterations;
    RandomizationResult rr = randomize(g, targets, ctx.engine.samples, rng);
    d.profile = std::move(rr.profile);
  } catch (const std::exception&) {
    d.solver_failure = true;
    d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));
  }

  detail::fill_link_quality(d, ch, ctx, false);
  int used = 0;
  for (int i : detail::age_order(states)) {
    if (used >= ctx.channels) break;
    if (d.per_stream_c[static_cast<std::size_t>(i)]) {
      d.x[static_cast<std::size_t>(i)] = 1;
      ++used;
    }
  }
  return d;
}

/// Max-age selection first, then phase optimization that maximizes the
/// weakest SNR across the selected set.
inline SchedulingDecision schedule_alg3(const std::vector<StreamState>& states,
                                        const ChannelRealization& ch, const PolicyContext& ctx,
                                        RandomStream& rng) {
  const int total = static_cast<int>(states.size());
  SchedulingDecision d;
  d.x.assign(static_cast<std::size_t>(total), 0);
  d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));

  std::vector<int> kept = detail::age_order(states);
  if (static_cast<int>(kept.size()) > ctx.channels) kept.resize(static_cast<std::size_t>(ctx.channels));

  const double floor_gain = ctx.gamma_th * ctx.params.noise_power / ctx.params.tx_power;
  try {
    std::vector<GainTarget> kt;
    for (int i : kept) kt.push_back(make_gain_target(ch, static_cast<std::size_t>(i)));
    MaxMinResult mm = solve_maxmin_gain(kt, ch.elements() + 1, ctx.engine, rng);
    d.sdp_solves += mm.solve.solves;
    d.sdp_iterations += mm.solve.iterations;
    RandomizationResult rr = randomize_served_min(mm.solve, kt, floor_gain,
                                                  static_cast<int>(kt.size()),
                                                  ctx.engine.samples, rng);
    d.profile = std::move(rr.profile);
  } catch (const std::exception&) {
    d.solver_failure = true;
    d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));
  }

  for (int i : kept) d.x[static_cast<std::size_t>(i)] = 1;
  detail::fill_link_quality(d, ch, ctx, false);
  return d;
}

/// Round-robin selection, phase optimization for the rotating set.
inline SchedulingDecision schedule_alg4(const std::vector<StreamState>& states,
                                        const ChannelRealization& ch, const PolicyContext& ctx,
                                        RoundRobinCursor& cursor, RandomStream& rng) {
  const int total = static_cast<int>(states.size());
  SchedulingDecision d;
  d.x.assign(static_cast<std::size_t>(total), 0);
  d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));

  std::vector<int> kept = cursor.take(ctx.channels, total);

  try {
    std::vector<GainTarget> kt;
    for (int i : kept) kt.push_back(make_gain_target(ch, static_cast<std::size_t>(i)));
    GainSolve g = solve_weighted_gain(kt, ch.elements() + 1, ctx.engine, rng);
    d.sdp_solves += g.solves;
    d.sdp_iterations += g.iterations;
    RandomizationResult rr = randomize(g, kt, ctx.engine.samples, rng);
    d.profile = std::move(rr.profile);
  } catch (const std::exception&) {
    d.solver_failure = true;
    d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));
  }

  for (int i : kept) d.x[static_cast<std::size_t>(i)] = 1;
  detail::fill_link_quality(d, ch, ctx, false);
  return d;
}

/// Max-age selection with the direct link only; the RIS is ignored entirely.
inline SchedulingDecision schedule_no_ris(const std::vector<StreamState>& states,
                                          const PolicyContext& ctx, const ChannelRealization& ch) {
  const int total = static_cast<int>(states.size());
  SchedulingDecision d;
  d.x.assign(static_cast<std::size_t>(total), 0);
  d.profile = PhaseProfile::zeros(static_cast<std::size_t>(ch.elements()));

  std::vector<int> kept = detail::age_order(states);
  if (static_cast<int>(kept.size()) > ctx.channels) kept.resize(static_cast<std::size_t>(ctx.channels));
  for (int i : kept) d.x[static_cast<std::size_t>(i)] = 1;
  detail::fill_link_quality(d, ch, ctx, true);
  return d;
}

inline SchedulingDecision schedule(PolicyKind kind, const std::vector<StreamState>& states,
                                   const ChannelRealization& ch, const PolicyContext& ctx,
                                   RandomStream& rng, RoundRobinCursor& cursor) {
  switch (kind) {
    case PolicyKind::alg1: return schedule_alg1(states, ch, ctx, rng);
    case PolicyKind::alg2: return schedule_alg2(states, ch, ctx, rng);
    case PolicyKind::alg3: return schedule_alg3(states, ch, ctx, rng);
    case PolicyKind::alg4: return schedule_alg4(states, ch, ctx, cursor, rng);
    case PolicyKind::no_ris: return schedule_no_ris(states, ctx, ch);
  }
  throw std::logic_error("schedule: unreachable");
}

}  // namespace risaoi
