#pragma once

// Self-check suites behind the `validate` CLI command. The replay oracles in
// risaoi::oracle are deliberately written as straight-line transcriptions of
// the slot recurrences, independent of the state-machine implementation they
// are compared against.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "risaoi/aoi.hpp"
#include "risaoi/channel.hpp"
#include "risaoi/config.hpp"
#include "risaoi/episode.hpp"
#include "risaoi/mec.hpp"
#include "risaoi/sdr.hpp"

namespace risaoi::oracle {

/// Inputs of a single-queue replay: per-slot, per-stream arrival, schedule
/// and channel indicators, 1-based slots.
struct SingleQueueInputs {
  int streams = 0;
  int horizon = 0;
  std::vector<std::uint8_t> a, x, c;  // slot-major

  std::uint8_t& at(std::vector<std::uint8_t>& v, int t, int i) {
    return v[static_cast<std::size_t>((t - 1) * streams + i)];
  }
  std::uint8_t get(const std::vector<std::uint8_t>& v, int t, int i) const {
    return v[static_cast<std::size_t>((t - 1) * streams + i)];
  }
};

struct SingleQueueTrace {
  std::vector<std::int64_t> age, z;     // slot-major, value at slot start
  std::vector<std::uint8_t> beta, delivered;
};

/// Straight-line replay of the single-queue recurrences: on a delivery the
/// age drops to the packet's system time plus one, otherwise it grows by one;
/// the system time resets on arrivals; the queue flag is set by arrivals,
/// cleared only by a successful delivery.
inline SingleQueueTrace replay_single_queue(const SingleQueueInputs& in) {
  const int total = in.streams, horizon = in.horizon;
  SingleQueueTrace tr;
  const std::size_t cells = static_cast<std::size_t>(total) * static_cast<std::size_t>(horizon);
  tr.age.resize(cells);
  tr.z.resize(cells);
  tr.beta.resize(cells);
  tr.delivered.resize(cells);
  for (int i = 0; i < total; ++i) {
    std::int64_t A = 1;
    std::int64_t z = 0;
    std::uint8_t beta = in.get(in.a, 1, i);
    for (int t = 1; t <= horizon; ++t) {
      const std::size_t k = static_cast<std::size_t>((t - 1) * total + i);
      const std::uint8_t x = in.get(in.x, t, i);
      const std::uint8_t c = in.get(in.c, t, i);
      const std::uint8_t del = (x == 1 && beta == 1 && c == 1) ? 1 : 0;
      tr.age[k] = A;
      tr.z[k] = z;
      tr.beta[k] = beta;
      tr.delivered[k] = del;
      if (t == horizon) break;
      const std::uint8_t a_next = in.get(in.a, t + 1, i);
      A = del ? z + 1 : A + 1;
      z = a_next ? 0 : z + 1;
      beta = a_next ? 1 : (del ? 0 : beta);
    }
  }
  return tr;
}

/// Inputs of a MEC replay: arrivals plus in/out schedule intents and channel
/// indicators. Schedule intents are masked by queue occupancy inside the
/// replay, mirroring the model constraints x <= beta and x_out <= beta_out.
struct MecInputs {
  int streams = 0;
  int horizon = 0;
  std::vector<std::uint8_t> a, in_x, out_x, c;  // slot-major intents

  std::uint8_t get(const std::vector<std::uint8_t>& v, int t, int i) const {
    return v[static_cast<std::size_t>((t - 1) * streams + i)];
  }
};

struct MecTrace {
  std::vector<std::int64_t> age, z, z_out, inter;
  std::vector<std::uint8_t> beta, beta_out, in_sched, out_sched, delivered;
};

/// Straight-line replay of the two-queue recurrences: one-slot processing
/// (a_out(t+1) = x(t)), the inter-arrival clock with its two zeroing cases,
/// the three-case system-time recurrence, the out-queue system time that
/// synchronizes on processed arrivals, and the delivery-driven age drop.
inline MecTrace replay_mec(const MecInputs& in) {
  const int total = in.streams, horizon = in.horizon;
  MecTrace tr;
  const std::size_t cells = static_cast<std::size_t>(total) * static_cast<std::size_t>(horizon);
  tr.age.resize(cells);
  tr.z.resize(cells);
  tr.z_out.resize(cells);
  tr.inter.resize(cells);
  tr.beta.resize(cells);
  tr.beta_out.resize(cells);
  tr.in_sched.resize(cells);
  tr.out_sched.resize(cells);
  tr.delivered.resize(cells);
  for (int i = 0; i < total; ++i) {
    std::int64_t A = 1, z = 0, zo = 0, inter = 0, t_last = 0;
    std::uint8_t beta = in.get(in.a, 1, i);
    std::uint8_t beta_out = 0;
    std::uint8_t beta_out_prev = 0;
    std::uint8_t ahat = 0;
    std::uint8_t xo_prev = 0, del_prev = 0;
    for (int t = 1; t <= horizon; ++t) {
      const std::size_t k = static_cast<std::size_t>((t - 1) * total + i);
      const std::uint8_t a = in.get(in.a, t, i);
      const std::uint8_t x = (in.get(in.in_x, t, i) && beta) ? 1 : 0;
      const std::uint8_t xo = (in.get(in.out_x, t, i) && beta_out) ? 1 : 0;
      const std::uint8_t c = in.get(in.c, t, i);
      const std::uint8_t del = (xo == 1 && beta_out == 1 && c == 1) ? 1 : 0;

      if (t > 1) {
        const bool zero_case = (beta == 0 && beta_out == 0) || (beta == 1 && beta_out == 0 && xo_prev == 1);
        if (zero_case) {
          inter = 0;
          t_last = 0;
        }
        if (x == 1) {
          if (!zero_case) inter = t - t_last;
          t_last = t;
        }
        if (a == 1 && beta_out == 0) z = 0;
        else if ((beta_out_prev == 1 && ahat == 1) || del_prev == 1) z = z + 1 - inter;
        else z = z + 1;
        zo = ahat ? z : zo + 1;
      } else if (x == 1) {
        t_last = 1;
      }

      tr.age[k] = A;
      tr.z[k] = z;
      tr.z_out[k] = zo;
      tr.inter[k] = inter;
      tr.beta[k] = beta;
      tr.beta_out[k] = beta_out;
      tr.in_sched[k] = x;
      tr.out_sched[k] = xo;
      tr.delivered[k] = del;
      if (t == horizon) break;

      const std::uint8_t a_next = in.get(in.a, t + 1, i);
      const std::uint8_t ahat_next = x;
      A = del ? zo + 1 : A + 1;
      beta_out_prev = beta_out;
      beta_out = ahat_next ? 1 : (del ? 0 : beta_out);
      beta = a_next ? 1 : ((beta && !x) ? 1 : 0);
      ahat = ahat_next;
      xo_prev = xo;
      del_prev = del;
    }
  }
  return tr;
}

}  // namespace risaoi::oracle

namespace risaoi {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline CheckResult check(const std::string& name, bool pass, const std::string& detail) {
  return CheckResult{name, pass, detail};
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace detail

/// Statistical and replay self-checks. `quick` shrinks the sample counts for
/// smoke runs; the defaults match the documented tolerances.
inline std::vector<CheckResult> run_validation_suite(std::uint64_t seed, bool quick = false) {
  std::vector<CheckResult> out;
  const int draws = quick ? 20000 : 100000;

  {  // Rayleigh scalar: mean, variance, tail mass
    RandomStream rng(splitmix64(seed ^ 0x1001));
    cxd mean = 0.0;
    double var = 0.0;
    int tail = 0;
    for (int k = 0; k < draws; ++k) {
      const cxd h = draw_rayleigh_scalar(rng);
      mean += h;
      var += std::norm(h);
      if (std::abs(h) > 1.0) ++tail;
    }
    mean /= static_cast<double>(draws);
    var /= static_cast<double>(draws);
    const double tail_frac = static_cast<double>(tail) / draws;
    const bool pass = std::abs(mean) < 0.02 && var > 0.97 && var < 1.03 &&
                      std::abs(tail_frac - std::exp(-1.0)) < 0.02 * std::exp(-1.0) + 0.01;
    out.push_back(detail::check("rayleigh-moments", pass,
                                "|mean|=" + detail::fmt(std::abs(mean)) + " var=" + detail::fmt(var) +
                                    " P(|h|>1)=" + detail::fmt(tail_frac)));
  }
  {  // Rician unit power at K = 2
    RandomStream rng(splitmix64(seed ^ 0x1002));
    const Eigen::VectorXcd los = Eigen::VectorXcd::Ones(4);
    double power = 0.0;
    for (int k = 0; k < draws / 4; ++k) {
      const Eigen::VectorXcd v = draw_rician_vector(2.0, los, rng);
      power += v.squaredNorm() / 4.0;
    }
    power /= static_cast<double>(draws / 4);
    const bool pass = std::abs(power - 1.0) < 0.02;
    out.push_back(detail::check("rician-unit-power", pass, "mean power=" + detail::fmt(power)));
  }
  {  // Bernoulli arrivals at lambda = 0.3: 3-sigma binomial interval
    RandomStream rng(splitmix64(seed ^ 0x1003));
    const double lambda = 0.3;
    int hits = 0;
    for (int k = 0; k < draws; ++k) hits += draw_arrival(lambda, rng) ? 1 : 0;
    const double rate = static_cast<double>(hits) / draws;
    const double sigma = std::sqrt(lambda * (1.0 - lambda) / draws);
    const bool pass = std::abs(rate - lambda) < 3.0 * sigma;
    out.push_back(detail::check("bernoulli-rate", pass,
                                "rate=" + detail::fmt(rate) + " bound=" + detail::fmt(3.0 * sigma)));
  }
  {  // Quadratic-form identity between the direct gain and the lifted form
    RandomStream rng(splitmix64(seed ^ 0x1004));
    double worst = 0.0;
    const int trials = quick ? 100 : 1000;
    for (int k = 0; k < trials; ++k) {
      const int f = 1 + static_cast<int>(rng.bits() % 8);
      Geometry g;
      g.user_positions = {{55.0, 2.0}};
      ChannelParams p;
      const ChannelRealization ch = draw_channels(g, p, f, rng);
      PhaseProfile profile;
      profile.phases.resize(static_cast<std::size_t>(f));
      for (double& t : profile.phases) t = rng.uniform(0.0, kTwoPi);
      const StreamMatrices m = build_matrices(ch, 0);
      Eigen::VectorXcd vbar(f + 1);
      for (int j = 0; j < f; ++j) vbar[j] = profile.coefficient(static_cast<std::size_t>(j));
      vbar[f] = 1.0;
      const double lifted = (vbar.adjoint() * m.theta * vbar).real().value() + m.direct_power;
      const double direct = effective_gain(ch, profile, 0);
      const double rel = std::abs(lifted - direct) / std::max(1e-300, std::abs(direct));
      worst = std::max(worst, rel);
    }
    out.push_back(detail::check("gain-quadratic-form", worst < 1e-9,
                                "worst rel err=" + detail::fmt(worst)));
  }
  {  // Single-queue state machine vs straight-line replay
    RandomStream rng(splitmix64(seed ^ 0x1005));
    bool ok = true;
    const int instances = quick ? 20 : 100;
    for (int inst = 0; inst < instances && ok; ++inst) {
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

      // Drive the implementation state machine over the same inputs.
      for (int i = 0; i < streams && ok; ++i) {
        StreamState s;
        s.arrival = in.get(in.a, 1, i) != 0;
        s.queue_flag = s.arrival;
        for (int t = 1; t <= horizon; ++t) {
          const std::size_t k = static_cast<std::size_t>((t - 1) * streams + i);
          const SlotOutcome o = make_outcome(in.get(in.x, t, i) != 0, s.queue_flag,
                                             in.get(in.c, t, i) != 0);
          if (s.age != replay.age[k] || s.system_time != replay.z[k] ||
              (s.queue_flag ? 1 : 0) != replay.beta[k] ||
              (o.delivered ? 1 : 0) != replay.delivered[k]) {
            ok = false;
            break;
          }
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
    out.push_back(detail::check("aoi-replay-equivalence", ok, ok ? "bit-identical" : "mismatch"));
  }
  {  // MEC state machine vs straight-line replay
    RandomStream rng(splitmix64(seed ^ 0x1006));
    bool ok = true;
    const int instances = quick ? 20 : 100;
    for (int inst = 0; inst < instances && ok; ++inst) {
      const int streams = 1 + static_cast<int>(rng.bits() % 3);
      const int horizon = 5 + static_cast<int>(rng.bits() % 36);
      oracle::MecInputs in;
      in.streams = streams;
      in.horizon = horizon;
      const std::size_t cells = static_cast<std::size_t>(streams * horizon);
      in.a.resize(cells);
      in.in_x.resize(cells);
      in.out_x.resize(cells);
      in.c.resize(cells);
      for (auto& v : in.a) v = rng.bernoulli(0.4) ? 1 : 0;
      for (auto& v : in.in_x) v = rng.bernoulli(0.6) ? 1 : 0;
      for (auto& v : in.out_x) v = rng.bernoulli(0.6) ? 1 : 0;
      for (auto& v : in.c) v = rng.bernoulli(0.7) ? 1 : 0;
      const auto replay = oracle::replay_mec(in);

      for (int i = 0; i < streams && ok; ++i) {
        MecStreamState s;
        s.arrival = in.get(in.a, 1, i) != 0;
        s.in_queue = s.arrival;
        for (int t = 1; t <= horizon; ++t) {
          const std::size_t k = static_cast<std::size_t>((t - 1) * streams + i);
          const bool x = in.get(in.in_x, t, i) && s.in_queue;
          const bool xo = in.get(in.out_x, t, i) && s.out_queue;
          const bool c = in.get(in.c, t, i) != 0;
          const bool del = xo && s.out_queue && c;
          if (t > 1) {
            const InterarrivalStep ia = step_interarrival(s, x, t);
            s.interarrival = ia.interarrival;
            s.last_in_slot = ia.last_in_slot;
            s.system_time = step_mec_system_time(s, s.arrival, s.out_queue, s.interarrival);
            s.out_system_time = step_out_system_time(s, s.system_time, s.processed_arrival);
          } else if (x) {
            s.last_in_slot = 1;
          }
          if (s.age != replay.age[k] || s.system_time != replay.z[k] ||
              s.out_system_time != replay.z_out[k] || s.interarrival != replay.inter[k] ||
              (s.in_queue ? 1 : 0) != replay.beta[k] ||
              (s.out_queue ? 1 : 0) != replay.beta_out[k] ||
              (x ? 1 : 0) != replay.in_sched[k] || (xo ? 1 : 0) != replay.out_sched[k] ||
              (del ? 1 : 0) != replay.delivered[k]) {
            ok = false;
            break;
          }
          if (t == horizon) break;
          const bool a_next = in.get(in.a, t + 1, i) != 0;
          const bool ahat_next = step_processed_arrival(x);
          s.age = step_mec_age(s, del);
          s.out_queue_prev = s.out_queue;
          s.out_queue = ahat_next ? true : (del ? false : s.out_queue);
          s.in_queue = a_next ? true : (s.in_queue && !x);
          s.arrival = a_next;
          s.processed_arrival = ahat_next;
          s.in_sched_prev = x;
          s.out_sched_prev = xo;
          s.out_delivered_prev = del;
        }
      }
    }
    out.push_back(detail::check("mec-replay-equivalence", ok, ok ? "bit-identical" : "mismatch"));
  }
  {  // SDR sanity on tiny instances: grid-search comparison
    RandomStream rng(splitmix64(seed ^ 0x1007));
    const int trials = quick ? 5 : 20;
    bool ok = true;
    double worst = 1.0;
    for (int k = 0; k < trials; ++k) {
      const int f = 1 + static_cast<int>(rng.bits() % 2);
      Geometry g;
      g.user_positions = {{54.0, 4.0}};
      ChannelParams p;
      p.gamma0 = 0.05;
      const ChannelRealization ch = draw_channels(g, p, f, rng);
      std::vector<GainTarget> targets{make_gain_target(ch, 0)};
      GainSolve solve = solve_weighted_gain(targets, f + 1, SdrEngineOptions{}, rng);
      RandomizationResult rr = randomize(solve, targets, 100, rng);
      // 64-point-per-element exhaustive grid
      double best = 0.0;
      const int grid = 64;
      std::vector<int> idx(static_cast<std::size_t>(f), 0);
      for (;;) {
        PhaseProfile prof;
        prof.phases.resize(static_cast<std::size_t>(f));
        for (int j = 0; j < f; ++j) prof.phases[static_cast<std::size_t>(j)] = kTwoPi * idx[static_cast<std::size_t>(j)] / grid;
        best = std::max(best, effective_gain(ch, prof, 0));
        int j = 0;
        for (; j < f; ++j) {
          if (++idx[static_cast<std::size_t>(j)] < grid) break;
          idx[static_cast<std::size_t>(j)] = 0;
        }
        if (j == f) break;
      }
      const double ratio = rr.objective / std::max(best, 1e-300);
      worst = std::min(worst, ratio);
      if (ratio < 0.9) ok = false;
    }
    out.push_back(detail::check("sdr-grid-ratio", ok, "worst ratio=" + detail::fmt(worst)));
  }
  {  // Episode determinism
    SimulationConfig cfg;
    cfg.streams = 3;
    cfg.channels = 1;
    cfg.ris_elements = 8;
    cfg.horizon = quick ? 20 : 60;
    cfg.policy = "alg1";
    const EpisodeTrace a = run_episode(cfg, seed);
    const EpisodeTrace b = run_episode(cfg, seed);
    bool same = a.records.size() == b.records.size() && a.summary.sum_aoi == b.summary.sum_aoi;
    for (std::size_t k = 0; same && k < a.records.size(); ++k) {
      same = a.records[k].age == b.records[k].age && a.records[k].snr == b.records[k].snr &&
             a.records[k].delivered == b.records[k].delivered;
    }
    out.push_back(detail::check("episode-determinism", same,
                                same ? "identical traces" : "traces differ"));
  }
  return out;
}

}  // namespace risaoi
