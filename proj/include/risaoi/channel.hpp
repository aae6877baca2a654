#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "risaoi/rng.hpp"

namespace risaoi {

using cxd = std::complex<double>;

using Position = std::array<double, 2>;

inline double distance(const Position& a, const Position& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1]);
}

/// Node placement in meters. Users are indexed 0..I-1.
struct Geometry {
  Position bs_position{0.0, 0.0};
  Position ris_position{51.0, 3.0};
  std::vector<Position> user_positions;

  std::size_t streams() const { return user_positions.size(); }

  void validate() const {
    if (distance(bs_position, ris_position) <= 0.0)
      throw std::invalid_argument("geometry: BS and RIS coincide");
    for (const auto& u : user_positions) {
      if (distance(ris_position, u) <= 0.0 || distance(bs_position, u) <= 0.0)
        throw std::invalid_argument("geometry: user coincides with BS or RIS");
    }
  }
};

enum class LosMode { steering, ones };

/// Propagation constants, all in linear units.
struct ChannelParams {
  double gamma0 = 1e-3;     // reference power gain at 1 m
  double eta_bR = 2.2;      // BS->RIS path-loss exponent
  double eta_Ri = 2.2;      // RIS->user path-loss exponent
  double eta_bi = 3.5;      // BS->user path-loss exponent
  double K1 = 2.0;          // Rician factor, BS->RIS
  double K2 = 2.0;          // Rician factor, RIS->user
  double noise_power = 1e-11;  // sigma^2, watts
  double tx_power = 1e-2;      // P, watts
  LosMode los_mode = LosMode::steering;

  void validate() const {
    if (gamma0 <= 0.0) throw std::invalid_argument("channel params: gamma0 must be > 0");
    if (noise_power <= 0.0) throw std::invalid_argument("channel params: noise power must be > 0");
    if (tx_power <= 0.0) throw std::invalid_argument("channel params: tx power must be > 0");
    if (eta_bR <= 0.0 || eta_Ri <= 0.0 || eta_bi <= 0.0)
      throw std::invalid_argument("channel params: path-loss exponents must be > 0");
    if (K1 < 0.0 || K2 < 0.0) throw std::invalid_argument("channel params: Rician factors must be >= 0");
  }
};

/// RIS configuration: F phases, each in [0, 2*pi). Element f multiplies the
/// incident signal by exp(j*phases[f]).
struct PhaseProfile {
  std::vector<double> phases;

  PhaseProfile() = default;
  explicit PhaseProfile(std::vector<double> p) : phases(std::move(p)) { normalize(); }
  static PhaseProfile zeros(std::size_t f) { return PhaseProfile(std::vector<double>(f, 0.0)); }

  std::size_t size() const { return phases.size(); }

  cxd coefficient(std::size_t f) const { return std::polar(1.0, phases[f]); }

  // Map every phase into [0, 2*pi).
  void normalize() {
    for (double& t : phases) {
      t = std::fmod(t, kTwoPi);
      if (t < 0.0) t += kTwoPi;
    }
  }
};

/// One slot's complex channel gains.
struct ChannelRealization {
  Eigen::VectorXcd h_bR;              // BS->RIS, length F
  std::vector<Eigen::VectorXcd> h_Ri; // RIS->user i, each length F
  std::vector<cxd> h_bi;              // BS->user i

  Eigen::Index elements() const { return h_bR.size(); }
  std::size_t streams() const { return h_bi.size(); }
};

/// Large-scale amplitude coefficient sqrt(gamma0 * d^-eta).
inline double path_loss(double dist, double eta, double gamma0) {
  if (dist <= 0.0) throw std::invalid_argument("path_loss: distance must be > 0");
  if (gamma0 <= 0.0) throw std::invalid_argument("path_loss: gamma0 must be > 0");
  return std::sqrt(gamma0 * std::pow(dist, -eta));
}

/// Half-wavelength ULA steering vector for a source seen at angle phi from
/// the array axis reference.
inline Eigen::VectorXcd steering_vector(Eigen::Index elements, double phi) {
  Eigen::VectorXcd v(elements);
  const double step = kPi * std::sin(phi);
  for (Eigen::Index f = 0; f < elements; ++f) v[f] = std::polar(1.0, step * static_cast<double>(f));
  return v;
}

inline Eigen::VectorXcd los_component(const Geometry& geom, const Position& endpoint,
                                      Eigen::Index elements, LosMode mode) {
  if (mode == LosMode::ones) return Eigen::VectorXcd::Ones(elements);
  const double phi = std::atan2(endpoint[1] - geom.ris_position[1], endpoint[0] - geom.ris_position[0]);
  return steering_vector(elements, phi);
}

/// Rician small-scale vector sqrt(K/(K+1))*los + sqrt(1/(K+1))*w with w CSCG.
inline Eigen::VectorXcd draw_rician_vector(double K, const Eigen::VectorXcd& los, RandomStream& rng) {
  if (K < 0.0) throw std::invalid_argument("draw_rician_vector: K must be >= 0");
  for (Eigen::Index f = 0; f < los.size(); ++f) {
    if (std::abs(std::abs(los[f]) - 1.0) > 1e-9)
      throw std::invalid_argument("draw_rician_vector: LoS entries must have unit magnitude");
  }
  const double a = std::sqrt(K / (K + 1.0));
  const double b = std::sqrt(1.0 / (K + 1.0));
  Eigen::VectorXcd out(los.size());
  for (Eigen::Index f = 0; f < los.size(); ++f) out[f] = a * los[f] + b * rng.cscg();
  return out;
}

/// CSCG scalar, zero mean, unit variance.
inline cxd draw_rayleigh_scalar(RandomStream& rng) { return rng.cscg(); }

/// Full per-slot realization: small-scale fading times large-scale path loss.
inline ChannelRealization draw_channels(const Geometry& geom, const ChannelParams& params,
                                        Eigen::Index elements, RandomStream& rng) {
  geom.validate();
  params.validate();
  ChannelRealization ch;
  const double pl_bR = path_loss(distance(geom.bs_position, geom.ris_position), params.eta_bR, params.gamma0);
  ch.h_bR = pl_bR * draw_rician_vector(params.K1, los_component(geom, geom.bs_position, elements, params.los_mode), rng);
  ch.h_Ri.reserve(geom.streams());
  ch.h_bi.reserve(geom.streams());
  for (const auto& user : geom.user_positions) {
    const double pl_Ri = path_loss(distance(geom.ris_position, user), params.eta_Ri, params.gamma0);
    ch.h_Ri.push_back(pl_Ri * draw_rician_vector(params.K2, los_component(geom, user, elements, params.los_mode), rng));
  }
  for (const auto& user : geom.user_positions) {
    const double pl_bi = path_loss(distance(geom.bs_position, user), params.eta_bi, params.gamma0);
    ch.h_bi.push_back(pl_bi * draw_rayleigh_scalar(rng));
  }
  return ch;
}

/// Overall channel power gain |h_bR^H diag(e^{j theta}) h_Ri + h_bi|^2,
/// evaluated directly in the complex domain.
inline double effective_gain(const ChannelRealization& ch, const PhaseProfile& profile, std::size_t i) {
  if (i >= ch.streams()) throw std::out_of_range("effective_gain: stream index out of range");
  if (static_cast<Eigen::Index>(profile.size()) != ch.elements())
    throw std::invalid_argument("effective_gain: profile length does not match RIS size");
  cxd sum = ch.h_bi[i];
  const auto& hri = ch.h_Ri[i];
  for (Eigen::Index f = 0; f < ch.elements(); ++f)
    sum += std::conj(ch.h_bR[f]) * profile.coefficient(static_cast<std::size_t>(f)) * hri[f];
  return std::norm(sum);
}

/// SNR at user i under the given profile: P * gain / sigma^2.
inline double snr(const ChannelRealization& ch, const PhaseProfile& profile, std::size_t i,
                  const ChannelParams& params) {
  return params.tx_power * effective_gain(ch, profile, i) / params.noise_power;
}

/// Direct-link SNR with the RIS ignored (empty-RIS limit of the gain).
inline double snr_direct(const ChannelRealization& ch, std::size_t i, const ChannelParams& params) {
  if (i >= ch.streams()) throw std::out_of_range("snr_direct: stream index out of range");
  return params.tx_power * std::norm(ch.h_bi[i]) / params.noise_power;
}

}  // namespace risaoi
