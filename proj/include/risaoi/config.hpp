#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risaoi/channel.hpp"
#include "risaoi/rng.hpp"
#include "risaoi/sdr.hpp"

namespace risaoi {

enum class PolicyKind { alg1, alg2, alg3, alg4, no_ris };

inline PolicyKind policy_from_name(const std::string& name) {
  if (name == "alg1") return PolicyKind::alg1;
  if (name == "alg2") return PolicyKind::alg2;
  if (name == "alg3") return PolicyKind::alg3;
  if (name == "alg4") return PolicyKind::alg4;
  if (name == "no_ris") return PolicyKind::no_ris;
  throw std::invalid_argument("unknown policy: " + name);
}

inline std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::alg1: return "alg1";
    case PolicyKind::alg2: return "alg2";
    case PolicyKind::alg3: return "alg3";
    case PolicyKind::alg4: return "alg4";
    case PolicyKind::no_ris: return "no_ris";
  }
  return "?";
}

inline const std::vector<PolicyKind>& all_policies() {
  static const std::vector<PolicyKind> v{PolicyKind::alg1, PolicyKind::alg2, PolicyKind::alg3,
                                         PolicyKind::alg4, PolicyKind::no_ris};
  return v;
}

/// User-facing simulation settings. Power-like quantities are entered in dB
/// units here and converted exactly once, when the resolved channel
/// parameters are materialized; the core runs on linear units only.
struct SimulationConfig {
  int streams = 5;        // I
  int channels = 2;       // N
  int ris_elements = 20;  // F
  int horizon = 500;      // T

  std::vector<double> lambdas{0.3};  // arrival probabilities; broadcast if one entry

  double gamma_th_db = 28.0;
  double tx_power_dbm = 10.0;
  double noise_dbm = -80.0;

  double gamma0 = 0.035;  // reference power gain at 1 m (linear)
  double eta_bR = 2.2;
  double eta_Ri = 2.2;
  double eta_bi = 3.5;
  double K1 = 2.0;
  double K2 = 2.0;
  std::string los_mode = "steering";  // steering | ones

  double bs_x = 0.0, bs_y = 0.0;
  double ris_x = 51.0, ris_y = 3.0;
  double user_disc_offset = 8.0;
  double user_disc_radius = 3.0;

  std::string policy = "alg1";

  bool mec = false;
  int mec_capacity = 0;     // 0 -> same as channels
  int local_delay = 2;      // processing delay of the no-MEC baseline arm
  int processing_delay = 0; // local processing delay applied to this run

  std::string sdp_solver = "lowrank";  // lowrank | splitting
  double sdp_tol = 1e-6;
  int sdp_max_iter = 5000;
  int lowrank_max_sweeps = 2000;
  int lowrank_rank = 0;
  int op2_outer = 10;
  int op3_outer = 12;
  int randomization_samples = 100;

  std::uint64_t seed = 1;
  int replications = 20;
  int threads = 1;

  void validate() const {
    if (streams < 1) throw std::invalid_argument("config: streams must be >= 1");
    if (channels < 1 || channels > streams)
      throw std::invalid_argument("config: channels must satisfy 1 <= N <= I");
    if (ris_elements < 0) throw std::invalid_argument("config: ris_elements must be >= 0");
    if (horizon < 1) throw std::invalid_argument("config: horizon must be >= 1");
    if (lambdas.empty()) throw std::invalid_argument("config: lambda missing");
    if (lambdas.size() != 1 && lambdas.size() != static_cast<std::size_t>(streams))
      throw std::invalid_argument("config: lambda list must have 1 or I entries");
    for (double l : lambdas)
      if (!(l > 0.0) || l > 1.0) throw std::invalid_argument("config: lambda must be in (0, 1]");
    if (mec_capacity < 0 || local_delay < 0 || processing_delay < 0)
      throw std::invalid_argument("config: negative MEC parameter");
    if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
    if (randomization_samples < 1)
      throw std::invalid_argument("config: randomization_samples must be >= 1");
    policy_from_name(policy);
    if (sdp_solver != "lowrank" && sdp_solver != "splitting")
      throw std::invalid_argument("config: sdp_solver must be lowrank or splitting");
    if (los_mode != "steering" && los_mode != "ones")
      throw std::invalid_argument("config: los_mode must be steering or ones");
  }

  double lambda_of(int i) const {
    return lambdas.size() == 1 ? lambdas[0] : lambdas[static_cast<std::size_t>(i)];
  }

  double gamma_th_linear() const { return db_to_linear(gamma_th_db); }

  ChannelParams channel_params() const {
    ChannelParams p;
    p.gamma0 = gamma0;
    p.eta_bR = eta_bR;
    p.eta_Ri = eta_Ri;
    p.eta_bi = eta_bi;
    p.K1 = K1;
    p.K2 = K2;
    p.noise_power = dbm_to_watts(noise_dbm);
    p.tx_power = dbm_to_watts(tx_power_dbm);
    p.los_mode = (los_mode == "ones") ? LosMode::ones : LosMode::steering;
    return p;
  }

  SdrEngineOptions engine_options() const {
    SdrEngineOptions o;
    o.kind = (sdp_solver == "splitting") ? SdpSolverKind::splitting : SdpSolverKind::lowrank;
    o.tol = sdp_tol;
    o.max_iter = sdp_max_iter;
    o.lowrank.max_sweeps = lowrank_max_sweeps;
    o.lowrank.rank = lowrank_rank;
    o.op2_outer = op2_outer;
    o.op3_outer = op3_outer;
    o.samples = randomization_samples;
    return o;
  }

  int effective_mec_capacity() const { return mec_capacity > 0 ? mec_capacity : channels; }
};

/// Episode geometry: the user disc is centered `user_disc_offset` meters past
/// the RIS along the BS->RIS direction and users are drawn uniformly inside.
inline Geometry make_geometry(const SimulationConfig& cfg, RandomStream& rng) {
  Geometry g;
  g.bs_position = {cfg.bs_x, cfg.bs_y};
  g.ris_position = {cfg.ris_x, cfg.ris_y};
  const double dx = cfg.ris_x - cfg.bs_x;
  const double dy = cfg.ris_y - cfg.bs_y;
  const double len = std::hypot(dx, dy);
  const double ux = (len > 0.0) ? dx / len : 1.0;
  const double uy = (len > 0.0) ? dy / len : 0.0;
  const double cx = cfg.ris_x + cfg.user_disc_offset * ux;
  const double cy = cfg.ris_y + cfg.user_disc_offset * uy;
  g.user_positions.reserve(static_cast<std::size_t>(cfg.streams));
  for (int i = 0; i < cfg.streams; ++i) {
    const double r = cfg.user_disc_radius * std::sqrt(rng.uniform());
    const double phi = kTwoPi * rng.uniform();
    g.user_positions.push_back({cx + r * std::cos(phi), cy + r * std::sin(phi)});
  }
  return g;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

inline bool parse_bool(const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config: bad boolean value '" + v + "'");
}

}  // namespace detail

/// Apply one `key = value` override. Unknown keys are rejected.
inline void apply_config_entry(SimulationConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = detail::trim(value);
  if (key == "streams" || key == "I") cfg.streams = std::stoi(v);
  else if (key == "channels" || key == "N") cfg.channels = std::stoi(v);
  else if (key == "ris_elements" || key == "F") cfg.ris_elements = std::stoi(v);
  else if (key == "horizon" || key == "T") cfg.horizon = std::stoi(v);
  else if (key == "lambda") cfg.lambdas = detail::parse_double_list(v);
  else if (key == "gamma_th_db") cfg.gamma_th_db = std::stod(v);
  else if (key == "tx_power_dbm") cfg.tx_power_dbm = std::stod(v);
  else if (key == "noise_dbm") cfg.noise_dbm = std::stod(v);
  else if (key == "gamma0") cfg.gamma0 = std::stod(v);
  else if (key == "eta_bR") cfg.eta_bR = std::stod(v);
  else if (key == "eta_Ri") cfg.eta_Ri = std::stod(v);
  else if (key == "eta_bi") cfg.eta_bi = std::stod(v);
  else if (key == "K1") cfg.K1 = std::stod(v);
  else if (key == "K2") cfg.K2 = std::stod(v);
  else if (key == "los_mode") cfg.los_mode = v;
  else if (key == "bs_x") cfg.bs_x = std::stod(v);
  else if (key == "bs_y") cfg.bs_y = std::stod(v);
  else if (key == "ris_x") cfg.ris_x = std::stod(v);
  else if (key == "ris_y") cfg.ris_y = std::stod(v);
  else if (key == "user_disc_offset") cfg.user_disc_offset = std::stod(v);
  else if (key == "user_disc_radius") cfg.user_disc_radius = std::stod(v);
  else if (key == "policy") cfg.policy = v;
  else if (key == "mec") cfg.mec = detail::parse_bool(v);
  else if (key == "mec_capacity") cfg.mec_capacity = std::stoi(v);
  else if (key == "local_delay") cfg.local_delay = std::stoi(v);
  else if (key == "processing_delay") cfg.processing_delay = std::stoi(v);
  else if (key == "sdp_solver") cfg.sdp_solver = v;
  else if (key == "sdp_tol") cfg.sdp_tol = std::stod(v);
  else if (key == "sdp_max_iter") cfg.sdp_max_iter = std::stoi(v);
  else if (key == "lowrank_max_sweeps") cfg.lowrank_max_sweeps = std::stoi(v);
  else if (key == "lowrank_rank") cfg.lowrank_rank = std::stoi(v);
  else if (key == "op2_outer") cfg.op2_outer = std::stoi(v);
  else if (key == "op3_outer") cfg.op3_outer = std::stoi(v);
  else if (key == "randomization_samples") cfg.randomization_samples = std::stoi(v);
  else if (key == "seed") cfg.seed = std::stoull(v);
  else if (key == "replications") cfg.replications = std::stoi(v);
  else if (key == "threads") cfg.threads = std::stoi(v);
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

/// Load a key=value config file. `#` starts a comment; blank lines ignored.
inline SimulationConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  SimulationConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: line " + std::to_string(lineno) + " is not key = value");
    apply_config_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace risaoi
