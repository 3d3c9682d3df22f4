#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "see/channel_gen.hpp"
#include "see/core_model.hpp"

using namespace see;

TEST_CASE("rayleigh sampling moments") {
  Rng rng(42);
  const int n_draws = 100000;
  SUBCASE("unit distance gives unit per-entry variance") {
    double acc = 0.0;
    for (int i = 0; i < n_draws; ++i) {
      VectorXcd h = sample_rayleigh_channel(2, 1.0, 2.7, rng);
      acc += h.squaredNorm();
    }
    CHECK(acc / (2.0 * n_draws) == doctest::Approx(1.0).epsilon(0.02));
  }
  SUBCASE("distance scaling d^-alpha") {
    double acc = 0.0;
    for (int i = 0; i < n_draws; ++i) {
      VectorXcd h = sample_rayleigh_channel(2, 2.0, 2.7, rng);
      acc += h.squaredNorm();
    }
    CHECK(acc / (2.0 * n_draws) == doctest::Approx(std::pow(2.0, -2.7)).epsilon(0.02));
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  Rng a(123), b(123);
  VectorXcd ha = sample_rayleigh_channel(4, 1.0, 2.7, a);
  VectorXcd hb = sample_rayleigh_channel(4, 1.0, 2.7, b);
  CHECK((ha - hb).norm() == 0.0);

  SystemParams p;
  ChannelGenConfig cfg;
  cfg.n_t = 3;
  cfg.seed = 99;
  ChannelSet c1 = make_scenario(p, Perfect{}, cfg);
  ChannelSet c2 = make_scenario(p, Perfect{}, cfg);
  CHECK((c1.h_s - c2.h_s).norm() == 0.0);
  CHECK((c1.h_p - c2.h_p).norm() == 0.0);
  CHECK((c1.h_e - c2.h_e).norm() == 0.0);
}

TEST_CASE("make_scenario per regime") {
  SystemParams p;
  ChannelGenConfig cfg;
  cfg.n_t = 3;
  cfg.seed = 7;
  SUBCASE("perfect carries three vectors") {
    ChannelSet ch = make_scenario(p, Perfect{}, cfg);
    CHECK(ch.h_s.size() == 3);
    CHECK(ch.h_p.size() == 3);
    CHECK(ch.h_e.size() == 3);
    CHECK(ch.g_e.size() == 0);
  }
  SUBCASE("statistical carries a scaled identity covariance") {
    ChannelSet ch = make_scenario(p, Statistical{0.1}, cfg);
    CHECK(ch.h_e.size() == 0);
    CHECK((ch.g_e - 0.1 * MatrixXcd::Identity(3, 3)).norm() == doctest::Approx(0.0));
  }
  SUBCASE("ellipsoidal carries estimates and radii") {
    ChannelSet ch = make_scenario(p, Ellipsoidal{0.1, 0.1, 0.1}, cfg);
    CHECK(ch.has_robust());
    CHECK(*ch.eps_s == 0.1);
    CHECK(*ch.eps_p == 0.1);
    CHECK(*ch.eps_e == 0.1);
    CHECK(ch.h_e_hat.size() == 3);
  }
}

TEST_CASE("ellipsoid perturbation stays in the ball") {
  Rng rng(31);
  VectorXcd h(3);
  h << cxd(1, 0.5), cxd(-0.3, 0.2), cxd(0, -1);
  SUBCASE("eps zero returns the estimate") {
    VectorXcd out = sample_ellipsoid_perturbation(h, 0.0, rng);
    CHECK((out - h).norm() == 0.0);
  }
  SUBCASE("norm bound holds over many draws") {
    for (int i = 0; i < 10000; ++i) {
      VectorXcd out = sample_ellipsoid_perturbation(h, 0.25, rng);
      CHECK((out - h).norm() <= 0.25 + 1e-12);
    }
  }
  SUBCASE("boundary mode lands exactly on the sphere") {
    for (int i = 0; i < 100; ++i) {
      VectorXcd out = sample_ellipsoid_perturbation(h, 0.25, rng, true);
      CHECK((out - h).norm() == doctest::Approx(0.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("gaussian channel mean anchors tr(G Q)") {
  Rng rng(55);
  MatrixXcd a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rng.cgaussian();
  MatrixXcd g = a * a.adjoint();
  MatrixXcd q(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) q(i, j) = rng.cgaussian();
  q = (q * q.adjoint()).eval();

  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    VectorXcd h = sample_gaussian_channel(g, rng);
    acc += quad_form(q, h);
  }
  const double expect = std::real((g * q).trace());
  CHECK(acc / n == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("empirical outage matches the exponential law in the scalar case") {
  // n_t = 1, G_e = 1, Q = p: harvested = zeta p |h|^2 with |h|^2 ~ Exp(1)
  SystemParams params;
  params.n_t = 1;
  params.zeta_eh = 0.5;
  const double p = 2.0;
  MatrixXcd q(1, 1);
  q(0, 0) = p;
  MatrixXcd g = MatrixXcd::Identity(1, 1);
  const double omega = 0.7;
  const double expect = 1.0 - std::exp(-omega / (params.zeta_eh * p));
  const double est =
      empirical_outage(q, g, VectorXcd(), params, HarvestBelow{omega}, 100000, 2024);
  CHECK(std::abs(est - expect) <= 0.01);
}

TEST_CASE("harvest outage is certain when the covariance misses the support") {
  SystemParams params;
  params.n_t = 2;
  MatrixXcd q = MatrixXcd::Zero(2, 2);
  q(0, 0) = 5.0;
  MatrixXcd g = MatrixXcd::Zero(2, 2);
  g(1, 1) = 1.0;  // supported orthogonally to Q
  CHECK(empirical_outage(q, g, VectorXcd(), params, HarvestBelow{0.1}, 2000, 5) == 1.0);
}

TEST_CASE("rate outage at a bound built to hold with equality") {
  // choose r_d so the closed-form rate-outage equals beta exactly, then the
  // Monte Carlo frequency must sit within 0.02 of beta
  SystemParams params;
  params.n_t = 2;
  Rng rng(77);
  VectorXcd h_s(2);
  h_s << cxd(0.9, 0.2), cxd(-0.4, 0.6);
  // rank-one beamforming covariance: the quadratic form is then exponential
  VectorXcd beam(2);
  beam << cxd(1.2, -0.4), cxd(0.5, 0.8);
  MatrixXcd q = beam * beam.adjoint();
  MatrixXcd g = 0.2 * MatrixXcd::Identity(2, 2);
  const double beta = 0.1;
  const double s = quad_form(q, h_s) / params.sigma_su_sq;
  const double m = std::real((g * q).trace()) / params.sigma_er_sq;
  const double r_d = std::log2((1.0 + s) / (1.0 - m * std::log(beta)));
  const double est = empirical_outage(q, g, h_s, params, RateBelow{r_d}, 100000, 31337);
  CHECK(std::abs(est - beta) <= 0.02);
}

TEST_CASE("parallel outage kernel matches the serial reference bitwise") {
  SystemParams params;
  params.n_t = 3;
  Rng rng(9);
  MatrixXcd a(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a(i, j) = rng.cgaussian();
  MatrixXcd g = a * a.adjoint();
  MatrixXcd q = MatrixXcd::Identity(3, 3);
  VectorXcd h_s(3);
  h_s << 1, cxd(0, 1), 0.5;
  for (const OutageKind& kind :
       {OutageKind(HarvestBelow{0.3}), OutageKind(RateBelow{0.5}), OutageKind(SeeBelow{0.1})}) {
    const double par = empirical_outage(q, g, h_s, params, kind, 50000, 111);
    const double ser = empirical_outage_serial(q, g, h_s, params, kind, 50000, 111);
    CHECK(par == ser);
  }
}
