#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "see/core_model.hpp"
#include "see/rng.hpp"

using namespace see;

namespace {

MatrixXcd random_hermitian(int n, Rng& rng) {
  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.cgaussian();
  return a + a.adjoint().eval();
}

MatrixXcd random_psd(int n, Rng& rng) {
  MatrixXcd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.cgaussian();
  return a * a.adjoint();
}

VectorXcd random_cvec(int n, Rng& rng) {
  VectorXcd v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.cgaussian();
  return v;
}

SystemParams unit_params(int n_t) {
  SystemParams p;
  p.n_t = n_t;
  p.sigma_su_sq = 1.0;
  p.sigma_er_sq = 1.0;
  p.p_c = 1.0;
  return p;
}

}  // namespace

TEST_CASE("log conversion constant") {
  CHECK(kLn2 == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::log2(std::exp(1.0)) * kLn2 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("secrecy rate basics") {
  SystemParams p = unit_params(2);
  ChannelSet ch;
  ch.h_s = VectorXcd::Zero(2);
  ch.h_s << 1, 0;
  ch.h_e = VectorXcd::Zero(2);
  ch.h_e << 0, 1;
  ch.h_p = ch.h_e;

  SUBCASE("zero covariance gives zero rate") {
    CHECK(secrecy_rate(MatrixXcd::Zero(2, 2), ch, p) == doctest::Approx(0.0));
  }
  SUBCASE("orthogonal channels") {
    MatrixXcd q = MatrixXcd::Zero(2, 2);
    q(0, 0) = 3.0;
    CHECK(secrecy_rate(q, ch, p) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(see_value(q, ch, p) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("balanced then perturbed diagonal") {
    ChannelSet c2;
    c2.h_s = VectorXcd(2);
    c2.h_s << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    c2.h_e = VectorXcd(2);
    c2.h_e << 1, 0;
    CHECK(secrecy_rate(MatrixXcd::Identity(2, 2), c2, p) == doctest::Approx(0.0).epsilon(1e-12));
    MatrixXcd q = MatrixXcd::Zero(2, 2);
    q(0, 0) = 0.5;
    q(1, 1) = 1.5;
    // log2(2) - log2(1.5), frozen from direct scalar evaluation
    CHECK(secrecy_rate(q, c2, p) == doctest::Approx(0.4150374992788438).epsilon(1e-12));
  }
  SUBCASE("dimension mismatch throws") {
    CHECK_THROWS_AS(secrecy_rate(MatrixXcd::Zero(3, 3), ch, p), DimensionError);
  }
}

TEST_CASE("see_value equals rate over total power on random instances") {
  Rng rng(7);
  SystemParams p = unit_params(2);
  for (int trial = 0; trial < 20; ++trial) {
    ChannelSet ch;
    ch.h_s = random_cvec(2, rng);
    ch.h_e = random_cvec(2, rng);
    MatrixXcd q = random_psd(2, rng);
    const double direct = secrecy_rate(q, ch, p) / (std::real(q.trace()) + p.p_c);
    CHECK(see_value(q, ch, p) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("interference leakage") {
  Rng rng(11);
  VectorXcd h_p = random_cvec(3, rng);
  SUBCASE("orthogonal beam leaks nothing") {
    VectorXcd q = random_cvec(3, rng);
    q -= h_p * (h_p.dot(q) / h_p.squaredNorm());
    MatrixXcd Q = q * q.adjoint();
    CHECK(interference_leakage(Q, h_p) == doctest::Approx(0.0).epsilon(1e-10));
  }
  SUBCASE("identity covariance leaks the squared norm") {
    VectorXcd h(2);
    h << 1, 1;
    CHECK(interference_leakage(MatrixXcd::Identity(2, 2), h) == doctest::Approx(2.0));
  }
  SUBCASE("matches eigendecomposition oracle") {
    MatrixXcd Q = random_psd(3, rng);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(Q);
    double expect = 0.0;
    for (int i = 0; i < 3; ++i)
      expect += es.eigenvalues()(i) * std::norm(es.eigenvectors().col(i).dot(h_p));
    CHECK(interference_leakage(Q, h_p) == doctest::Approx(expect).epsilon(1e-10));
  }
}

TEST_CASE("harvested power") {
  VectorXcd e1(2);
  e1 << 1, 0;
  MatrixXcd q = 2.0 * e1 * e1.adjoint();
  CHECK(harvested_power(q, e1, 0.5) == doctest::Approx(1.0));
  CHECK(harvested_power(MatrixXcd::Zero(2, 2), e1, 0.5) == doctest::Approx(0.0));
  Rng rng(3);
  MatrixXcd Q = random_psd(3, rng);
  VectorXcd h = random_cvec(3, rng);
  CHECK(harvested_power(Q, h, 0.7) ==
        doctest::Approx(0.7 * interference_leakage(Q, h)).epsilon(1e-12));
}

TEST_CASE("linearity of quadratic forms in the covariance") {
  Rng rng(5);
  VectorXcd h = random_cvec(3, rng);
  MatrixXcd q1 = random_psd(3, rng), q2 = random_psd(3, rng);
  const double a = 0.3, b = 1.7;
  CHECK(interference_leakage(a * q1 + b * q2, h) ==
        doctest::Approx(a * interference_leakage(q1, h) + b * interference_leakage(q2, h))
            .epsilon(1e-10));
  CHECK(harvested_power(a * q1 + b * q2, h, 0.5) ==
        doctest::Approx(a * harvested_power(q1, h, 0.5) + b * harvested_power(q2, h, 0.5))
            .epsilon(1e-10));
}

TEST_CASE("secrecy rate is invariant under global channel phase") {
  Rng rng(13);
  SystemParams p = unit_params(3);
  ChannelSet ch;
  ch.h_s = random_cvec(3, rng);
  ch.h_e = random_cvec(3, rng);
  MatrixXcd q = random_psd(3, rng);
  const double base = secrecy_rate(q, ch, p);
  for (int k = 0; k < 10; ++k) {
    const double phi = rng.uniform() * 6.28;
    ChannelSet rot = ch;
    rot.h_s *= std::polar(1.0, phi);
    rot.h_e *= std::polar(1.0, -0.37 * phi);
    CHECK(secrecy_rate(q, rot, p) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("rank one extraction") {
  SUBCASE("outer product recovers the vector up to phase") {
    VectorXcd q(2);
    q << cxd(1, 0), cxd(0, 1);
    q *= 2.0 / std::sqrt(2.0);
    RankOne r = rank_one_extract(q * q.adjoint(), 1e-6);
    CHECK(r.residual == doctest::Approx(0.0).epsilon(1e-12));
    // up to a global phase; the convention pins the first entry real >= 0
    CHECK((r.beam - q).norm() == doctest::Approx(0.0).epsilon(1e-8));
  }
  SUBCASE("tiny second eigenvalue passes") {
    MatrixXcd q = MatrixXcd::Zero(2, 2);
    q(0, 0) = 1.0;
    q(1, 1) = 1e-9;
    RankOne r = rank_one_extract(q, 1e-6);
    CHECK(r.residual == doctest::Approx(1e-9).epsilon(1e-6));
    CHECK(std::abs(r.beam(0)) == doctest::Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("identity is not rank one") {
    CHECK_THROWS_AS(rank_one_extract(MatrixXcd::Identity(2, 2), 1e-6), RankOneError);
  }
  SUBCASE("zero matrix") {
    CHECK_THROWS_AS(rank_one_extract(MatrixXcd::Zero(2, 2), 1e-6), RankOneError);
  }
  SUBCASE("property: random outer products recovered") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 2 + static_cast<int>(rng.next_u64() % 3);
      VectorXcd v = random_cvec(n, rng);
      RankOne r = principal_component(v * v.adjoint());
      CHECK(r.residual <= 1e-10);
      // compare after aligning the global phase
      cxd ph = v.dot(r.beam);
      ph /= std::abs(ph);
      CHECK((r.beam - ph * v).norm() <= 1e-7 * v.norm());
    }
  }
}

TEST_CASE("hermitian psd validation") {
  CHECK(validate_hermitian_psd(MatrixXcd::Identity(3, 3), 1e-8));
  MatrixXcd bad = MatrixXcd::Zero(2, 2);
  bad(0, 0) = 1.0;
  bad(1, 1) = -1e-3;
  CHECK_FALSE(validate_hermitian_psd(bad, 1e-8));
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    MatrixXcd h = random_hermitian(3, rng);
    MatrixXcd psd = h * h;  // square of Hermitian is PSD
    CHECK(validate_hermitian_psd(psd, 1e-8));
    CHECK(validate_hermitian_psd(random_hermitian(3, rng) * cxd(0, 1), 1e-8) ==
          false);  // skew-Hermitian unless zero
  }
}

TEST_CASE("see_value scaling behaviour") {
  Rng rng(23);
  SystemParams p = unit_params(2);
  ChannelSet ch;
  ch.h_s = random_cvec(2, rng);
  ch.h_e = 0.1 * random_cvec(2, rng);
  MatrixXcd q0 = random_psd(2, rng);
  // best 1-D rescaling of a fixed direction dominates every c in (0,1]
  double best = -1e300;
  for (int i = 1; i <= 2000; ++i) {
    const double c = i / 2000.0;
    best = std::max(best, see_value(c * q0, ch, p));
  }
  for (double c : {0.05, 0.2, 0.5, 0.75, 1.0})
    CHECK(see_value(c * q0, ch, p) <= best + 1e-12);
  // efficiency decays to zero as the power grows with fixed direction
  CHECK(see_value(1e9 * q0, ch, p) < 1e-6);
}

TEST_CASE("parameter validation") {
  SystemParams p;
  CHECK_NOTHROW(p.validate());
  p.xi = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  OutageSpec o;
  CHECK_NOTHROW(o.validate());
  o.beta = 0.5;
  CHECK_THROWS_AS(o.validate(), std::invalid_argument);
}
