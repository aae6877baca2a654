#include <doctest.h>

#include <cmath>
#include <complex>

#include "risaoi/channel.hpp"
#include "risaoi/sdr.hpp"

using namespace risaoi;

namespace {

Geometry unit_triangle() {
  // BS, RIS and the single user pairwise 1 m apart.
  Geometry g;
  g.bs_position = {0.0, 0.0};
  g.ris_position = {1.0, 0.0};
  g.user_positions = {{0.5, std::sqrt(0.75)}};
  return g;
}

}  // namespace

TEST_CASE("path_loss closed form") {
  CHECK(path_loss(1.0, 2.2, 1.0) == doctest::Approx(1.0));
  CHECK(path_loss(1.0, 3.5, 1e-3) == doctest::Approx(0.03162277660168379));
  // frozen from an independent evaluation of sqrt(1e-3 * 51^-2.2)
  CHECK(path_loss(51.0, 2.2, 1e-3) == doctest::Approx(0.00041847816849033677).epsilon(1e-12));
}

TEST_CASE("path_loss domain errors") {
  CHECK_THROWS_AS(path_loss(0.0, 2.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(-3.0, 2.2, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(1.0, 2.2, 0.0), std::invalid_argument);
}

TEST_CASE("path_loss strictly decreasing in distance") {
  RandomStream rng(7);
  for (int k = 0; k < 200; ++k) {
    const double d1 = rng.uniform(0.1, 100.0);
    const double d2 = d1 + rng.uniform(0.01, 50.0);
    const double eta = rng.uniform(1.5, 4.0);
    CHECK(path_loss(d1, eta, 1e-3) > path_loss(d2, eta, 1e-3));
  }
}

TEST_CASE("rician vector: specular limit") {
  RandomStream rng(11);
  const Eigen::VectorXcd los = steering_vector(6, 0.7);
  const Eigen::VectorXcd v = draw_rician_vector(1e12, los, rng);
  for (int f = 0; f < 6; ++f) CHECK(std::abs(v[f] - los[f]) < 1e-5);
}

TEST_CASE("rician vector: K=0 is Rayleigh with unit variance") {
  RandomStream rng(13);
  const Eigen::VectorXcd los = Eigen::VectorXcd::Ones(4);
  const int draws = 100000 / 4;
  Eigen::Vector4cd mean = Eigen::Vector4cd::Zero();
  Eigen::Vector4d power = Eigen::Vector4d::Zero();
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXcd v = draw_rician_vector(0.0, los, rng);
    for (int f = 0; f < 4; ++f) {
      mean[f] += v[f];
      power[f] += std::norm(v[f]);
    }
  }
  for (int f = 0; f < 4; ++f) {
    CHECK(std::abs(mean[f]) / draws < 0.02);
    CHECK(power[f] / draws == doctest::Approx(1.0).epsilon(0.02));
  }
}

TEST_CASE("rician vector: unit average power at K=2") {
  RandomStream rng(17);
  const Eigen::VectorXcd los = steering_vector(4, -0.3);
  const int draws = 100000 / 4;
  Eigen::Vector4d power = Eigen::Vector4d::Zero();
  for (int k = 0; k < draws; ++k) {
    const Eigen::VectorXcd v = draw_rician_vector(2.0, los, rng);
    for (int f = 0; f < 4; ++f) power[f] += std::norm(v[f]);
  }
  for (int f = 0; f < 4; ++f) CHECK(power[f] / draws == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("rician vector rejects negative K") {
  RandomStream rng(1);
  CHECK_THROWS_AS(draw_rician_vector(-0.1, Eigen::VectorXcd::Ones(2), rng), std::invalid_argument);
}

TEST_CASE("rayleigh scalar moments and tail") {
  RandomStream rng(19);
  const int draws = 100000;
  cxd mean = 0.0;
  double var = 0.0;
  int tail = 0;
  for (int k = 0; k < draws; ++k) {
    const cxd h = draw_rayleigh_scalar(rng);
    mean += h;
    var += std::norm(h);
    if (std::abs(h) > 1.0) ++tail;
  }
  CHECK(std::abs(mean) / draws < 0.02);
  CHECK(var / draws > 0.97);
  CHECK(var / draws < 1.03);
  // P(|h| > 1) = exp(-1) for a unit-variance Rayleigh envelope
  CHECK(static_cast<double>(tail) / draws ==
        doctest::Approx(0.36787944117144233).epsilon(0.02));
}

TEST_CASE("draw_channels: deterministic specular composition") {
  ChannelParams p;
  p.gamma0 = 1.0;
  p.K1 = 1e12;
  p.K2 = 1e12;
  RandomStream rng(23);
  const ChannelRealization ch = draw_channels(unit_triangle(), p, 1, rng);
  CHECK(std::abs(ch.h_bR[0]) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(ch.h_Ri[0][0]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("draw_channels: direct-link average power") {
  Geometry g;
  g.user_positions = {{40.0, 0.0}};
  ChannelParams p;
  p.gamma0 = 1e-3;
  const double expected = 1e-3 * std::pow(40.0, -p.eta_bi);
  RandomStream rng(29);
  double power = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) {
    const ChannelRealization ch = draw_channels(g, p, 1, rng);
    power += std::norm(ch.h_bi[0]);
  }
  CHECK(power / draws == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("draw_channels: identical seeds give identical realizations") {
  Geometry g;
  g.user_positions = {{55.0, 1.0}, {60.0, 5.0}};
  ChannelParams p;
  RandomStream a(123), b(123);
  const ChannelRealization ca = draw_channels(g, p, 8, a);
  const ChannelRealization cb = draw_channels(g, p, 8, b);
  CHECK(ca.h_bR == cb.h_bR);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(ca.h_Ri[i] == cb.h_Ri[i]);
    CHECK(ca.h_bi[i] == cb.h_bi[i]);
  }
}

TEST_CASE("effective_gain: empty RIS degenerates to the direct link") {
  ChannelRealization ch;
  ch.h_bR = Eigen::VectorXcd(0);
  ch.h_Ri = {Eigen::VectorXcd(0)};
  ch.h_bi = {cxd(0.3, -0.4)};
  CHECK(effective_gain(ch, PhaseProfile{}, 0) == doctest::Approx(0.25));
}

TEST_CASE("effective_gain: single-element arithmetic") {
  ChannelRealization ch;
  ch.h_bR = Eigen::VectorXcd::Ones(1);
  ch.h_Ri = {Eigen::VectorXcd::Ones(1)};
  ch.h_bi = {cxd(1.0, 0.0)};
  CHECK(effective_gain(ch, PhaseProfile({0.0}), 0) == doctest::Approx(4.0));
}

TEST_CASE("effective_gain: phase alignment against a grid scan") {
  ChannelRealization ch;
  ch.h_bR = Eigen::VectorXcd::Ones(1);
  ch.h_Ri = {Eigen::VectorXcd(1)};
  ch.h_Ri[0][0] = cxd(0.0, 1.0);
  ch.h_bi = {cxd(1.0, 0.0)};
  // theta = -pi/2 cancels the j: gain 4; theta = +pi/2 anti-aligns: gain 0
  CHECK(effective_gain(ch, PhaseProfile({-kPi / 2}), 0) == doctest::Approx(4.0));
  CHECK(effective_gain(ch, PhaseProfile({kPi / 2}), 0) == doctest::Approx(0.0).epsilon(1e-12));
  double best = 0.0, worst = 1e9;
  double arg_best = 0.0, arg_worst = 0.0;
  for (int k = 0; k < 360; ++k) {
    const double t = kTwoPi * k / 360.0;
    const double gain = effective_gain(ch, PhaseProfile({t}), 0);
    if (gain > best) {
      best = gain;
      arg_best = t;
    }
    if (gain < worst) {
      worst = gain;
      arg_worst = t;
    }
  }
  CHECK(best == doctest::Approx(4.0));
  CHECK(worst == doctest::Approx(0.0).epsilon(1e-3));
  CHECK(arg_best == doctest::Approx(3.0 * kPi / 2).epsilon(0.02));  // -pi/2 mod 2pi
  CHECK(arg_worst == doctest::Approx(kPi / 2).epsilon(0.02));
}

TEST_CASE("effective_gain input checks") {
  ChannelRealization ch;
  ch.h_bR = Eigen::VectorXcd::Ones(2);
  ch.h_Ri = {Eigen::VectorXcd::Ones(2)};
  ch.h_bi = {cxd(0.0, 0.0)};
  CHECK_THROWS_AS(effective_gain(ch, PhaseProfile({0.0}), 0), std::invalid_argument);
  CHECK_THROWS_AS(effective_gain(ch, PhaseProfile({0.0, 0.0}), 1), std::out_of_range);
}

TEST_CASE("snr composition") {
  ChannelRealization ch;
  ch.h_bR = Eigen::VectorXcd(0);
  ch.h_Ri = {Eigen::VectorXcd(0)};
  ch.h_bi = {cxd(0.0, 0.0)};
  ChannelParams p;
  p.tx_power = 1.0;
  p.noise_power = 1.0;
  CHECK(snr(ch, PhaseProfile{}, 0, p) == doctest::Approx(0.0));

  ch.h_bi = {cxd(1.0, 0.0)};
  CHECK(snr(ch, PhaseProfile{}, 0, p) == doctest::Approx(1.0));

  // P = 10 dBm, sigma^2 = -80 dBm, gain 1e-6 -> 30 dB
  p.tx_power = dbm_to_watts(10.0);
  p.noise_power = dbm_to_watts(-80.0);
  ch.h_bi = {cxd(1e-3, 0.0)};
  CHECK(snr(ch, PhaseProfile{}, 0, p) == doctest::Approx(1000.0).epsilon(1e-9));
}

TEST_CASE("phase profile is unit modulus by construction") {
  RandomStream rng(31);
  for (int k = 0; k < 50; ++k) {
    PhaseProfile p;
    p.phases.resize(8);
    for (double& t : p.phases) t = rng.uniform(-20.0, 20.0);
    p.normalize();
    for (std::size_t f = 0; f < p.size(); ++f) {
      CHECK(p.phases[f] >= 0.0);
      CHECK(p.phases[f] < kTwoPi);
      CHECK(std::abs(std::abs(p.coefficient(f)) - 1.0) <= 1e-15);
    }
  }
}

TEST_CASE("quadratic form matches the direct gain") {
  RandomStream rng(37);
  Geometry g;
  g.user_positions = {{55.0, 2.0}};
  ChannelParams p;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const int f = 1 + static_cast<int>(rng.bits() % 8);
    const ChannelRealization ch = draw_channels(g, p, f, rng);
    PhaseProfile prof;
    prof.phases.resize(static_cast<std::size_t>(f));
    for (double& t : prof.phases) t = rng.uniform(0.0, kTwoPi);
    const StreamMatrices m = build_matrices(ch, 0);
    Eigen::VectorXcd vbar(f + 1);
    for (int j = 0; j < f; ++j) vbar[j] = prof.coefficient(static_cast<std::size_t>(j));
    vbar[f] = 1.0;
    const double lifted = (vbar.adjoint() * m.theta * vbar).real().value() + m.direct_power;
    const double direct = effective_gain(ch, prof, 0);
    worst = std::max(worst, std::abs(lifted - direct) / std::max(1e-300, direct));
  }
  CHECK(worst < 1e-9);
}
