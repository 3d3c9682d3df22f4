#include "see/channel_gen.hpp"

#include <cmath>

#include "see/core_model.hpp"

namespace see {

void ChannelGenConfig::validate() const {
  if (n_t < 1) throw std::invalid_argument("ChannelGenConfig: n_t must be >= 1");
  if (!(d_s > 0) || !(d_p > 0) || !(d_e > 0))
    throw std::invalid_argument("ChannelGenConfig: distances must be > 0");
  if (!(pathloss_exp > 0)) throw std::invalid_argument("ChannelGenConfig: pathloss_exp must be > 0");
}

VectorXcd sample_rayleigh_channel(int n_t, double d, double pathloss_exp, Rng& rng) {
  if (n_t < 1) throw std::invalid_argument("sample_rayleigh_channel: n_t must be >= 1");
  if (!(d > 0)) throw std::invalid_argument("sample_rayleigh_channel: d must be > 0");
  const double scale = std::sqrt(std::pow(d, -pathloss_exp));
  VectorXcd h(n_t);
  for (int i = 0; i < n_t; ++i) h(i) = scale * rng.cgaussian();
  return h;
}

ChannelSet make_scenario(const SystemParams& params, const Regime& regime,
                         const ChannelGenConfig& cfg) {
  params.validate();
  cfg.validate();
  Rng rng(cfg.seed);
  ChannelSet ch;
  const VectorXcd hs = sample_rayleigh_channel(cfg.n_t, cfg.d_s, cfg.pathloss_exp, rng);
  const VectorXcd hp = sample_rayleigh_channel(cfg.n_t, cfg.d_p, cfg.pathloss_exp, rng);
  if (std::holds_alternative<Perfect>(regime)) {
    ch.h_s = hs;
    ch.h_p = hp;
    ch.h_e = sample_rayleigh_channel(cfg.n_t, cfg.d_e, cfg.pathloss_exp, rng);
  } else if (const auto* st = std::get_if<Statistical>(&regime)) {
    ch.h_s = hs;
    ch.h_p = hp;
    ch.g_e = st->g_e_scale * MatrixXcd::Identity(cfg.n_t, cfg.n_t);
  } else {
    const auto& el = std::get<Ellipsoidal>(regime);
    ch.h_s_hat = hs;
    ch.h_p_hat = hp;
    ch.h_e_hat = sample_rayleigh_channel(cfg.n_t, cfg.d_e, cfg.pathloss_exp, rng);
    ch.eps_s = el.eps_s;
    ch.eps_p = el.eps_p;
    ch.eps_e = el.eps_e;
  }
  ch.validate(cfg.n_t);
  return ch;
}

VectorXcd sample_ellipsoid_perturbation(const VectorXcd& h_hat, double eps, Rng& rng,
                                        bool boundary) {
  if (eps < 0) throw std::invalid_argument("sample_ellipsoid_perturbation: eps must be >= 0");
  const int n = static_cast<int>(h_hat.size());
  if (eps == 0.0) return h_hat;
  VectorXcd dir(n);
  for (int i = 0; i < n; ++i) dir(i) = rng.cgaussian();
  const double dn = dir.norm();
  if (dn == 0.0) return h_hat;
  dir /= dn;
  const double r = boundary ? eps : eps * std::pow(rng.uniform(), 1.0 / (2.0 * n));
  return h_hat + r * dir;
}

VectorXcd sample_gaussian_channel(const MatrixXcd& g_e, Rng& rng) {
  const int n = static_cast<int>(g_e.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g_e);
  VectorXcd z(n);
  for (int i = 0; i < n; ++i) z(i) = rng.cgaussian();
  Eigen::VectorXd scale = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * scale.asDiagonal() * z;
}

namespace {

struct OutageEval {
  double snr_s;      // h_s^H Q h_s / sigma_su^2 (0 when h_s absent)
  double p_total;    // tr Q + p_c

  bool event(const MatrixXcd& q, const VectorXcd& h_e, const SystemParams& params,
             const OutageKind& kind) const {
    if (const auto* hb = std::get_if<HarvestBelow>(&kind))
      return params.zeta_eh * quad_form(q, h_e) <= hb->omega_s;
    const double e = quad_form(q, h_e) / params.sigma_er_sq;
    const double rate = std::log2(1.0 + snr_s) - std::log2(1.0 + e);
    if (const auto* rb = std::get_if<RateBelow>(&kind)) return rate < rb->r_d;
    return rate / p_total < std::get<SeeBelow>(kind).delta;
  }
};

constexpr int kChunk = 4096;

template <bool Parallel>
double outage_impl(const MatrixXcd& q_cov, const MatrixXcd& g_e, const VectorXcd& h_s,
                   const SystemParams& params, const OutageKind& kind, int n_samples,
                   std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("empirical_outage: n_samples must be >= 1");
  if (!validate_hermitian_psd(g_e, 1e-8))
    throw std::invalid_argument("empirical_outage: g_e must be Hermitian PSD");
  OutageEval ev;
  ev.snr_s = h_s.size() > 0 ? quad_form(q_cov, h_s) / params.sigma_su_sq : 0.0;
  ev.p_total = std::real(q_cov.trace()) + params.p_c;

  // factor once; chunks redo only the z draws
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g_e);
  const MatrixXcd factor =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  const int n = static_cast<int>(g_e.rows());
  const int n_chunks = (n_samples + kChunk - 1) / kChunk;

  long long hits = 0;
#pragma omp parallel for reduction(+ : hits) schedule(static) if (Parallel)
  for (int c = 0; c < n_chunks; ++c) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    const int lo = c * kChunk;
    const int hi = std::min(n_samples, lo + kChunk);
    VectorXcd z(n);
    long long local = 0;
    for (int i = lo; i < hi; ++i) {
      for (int k = 0; k < n; ++k) z(k) = rng.cgaussian();
      const VectorXcd h_e = factor * z;
      if (ev.event(q_cov, h_e, params, kind)) ++local;
    }
    hits += local;
  }
  return static_cast<double>(hits) / n_samples;
}

}  // namespace

double empirical_outage(const MatrixXcd& q_cov, const MatrixXcd& g_e, const VectorXcd& h_s,
                        const SystemParams& params, const OutageKind& kind, int n_samples,
                        std::uint64_t seed) {
  return outage_impl<true>(q_cov, g_e, h_s, params, kind, n_samples, seed);
}

double empirical_outage_serial(const MatrixXcd& q_cov, const MatrixXcd& g_e,
                               const VectorXcd& h_s, const SystemParams& params,
                               const OutageKind& kind, int n_samples, std::uint64_t seed) {
  return outage_impl<false>(q_cov, g_e, h_s, params, kind, n_samples, seed);
}

}  // namespace see
