#include "see/core_model.hpp"

#include <cmath>

namespace see {

void SystemParams::validate() const {
  if (n_t < 1) throw std::invalid_argument("SystemParams: n_t must be >= 1");
  if (!(sigma_su_sq > 0) || !(sigma_er_sq > 0))
    throw std::invalid_argument("SystemParams: noise variances must be > 0");
  if (!(p_c > 0) || !(p_tx > 0) || !(p_f > 0))
    throw std::invalid_argument("SystemParams: p_c, p_tx, p_f must be > 0");
  if (!(omega_s >= 0)) throw std::invalid_argument("SystemParams: omega_s must be >= 0");
  if (!(r_d >= 0)) throw std::invalid_argument("SystemParams: r_d must be >= 0");
  if (!(xi > 0) || xi > 1) throw std::invalid_argument("SystemParams: xi must be in (0,1]");
  if (!(zeta_eh > 0) || zeta_eh > 1)
    throw std::invalid_argument("SystemParams: zeta_eh must be in (0,1]");
}

void OutageSpec::validate() const {
  for (double p : {alpha, beta, gamma})
    if (!(p > 0) || !(p < 0.5))
      throw std::invalid_argument("OutageSpec: probabilities must lie in (0, 0.5)");
}

void ChannelSet::validate(int n_t) const {
  auto check_vec = [n_t](const VectorXcd& v, const char* name) {
    if (v.size() > 0 && v.size() != n_t)
      throw DimensionError(std::string("ChannelSet: ") + name + " length mismatch");
  };
  check_vec(h_s, "h_s");
  check_vec(h_p, "h_p");
  check_vec(h_e, "h_e");
  check_vec(h_s_hat, "h_s_hat");
  check_vec(h_p_hat, "h_p_hat");
  check_vec(h_e_hat, "h_e_hat");
  if (g_e.size() > 0) {
    if (g_e.rows() != n_t || g_e.cols() != n_t)
      throw DimensionError("ChannelSet: g_e dimension mismatch");
    if (!validate_hermitian_psd(g_e, 1e-8))
      throw std::invalid_argument("ChannelSet: g_e must be Hermitian PSD");
  }
  for (const auto& eps : {eps_s, eps_p, eps_e})
    if (eps && *eps < 0) throw std::invalid_argument("ChannelSet: ellipsoid radii must be >= 0");
}

void DinkelbachConfig::validate() const {
  if (!(eps_outer > 0) || !(zeta_inner > 0))
    throw std::invalid_argument("DinkelbachConfig: tolerances must be > 0");
  if (max_outer < 1 || max_inner < 1)
    throw std::invalid_argument("DinkelbachConfig: iteration caps must be >= 1");
  if (!(lambda0 >= 0)) throw std::invalid_argument("DinkelbachConfig: lambda0 must be >= 0");
}

double quad_form(const MatrixXcd& q_cov, const VectorXcd& h) {
  if (q_cov.rows() != h.size() || q_cov.cols() != h.size())
    throw DimensionError("quad_form: dimension mismatch");
  return std::real(h.dot(q_cov * h));
}

double secrecy_rate(const MatrixXcd& q_cov, const ChannelSet& ch, const SystemParams& params) {
  const double s = quad_form(q_cov, ch.h_s) / params.sigma_su_sq;
  const double e = quad_form(q_cov, ch.h_e) / params.sigma_er_sq;
  return std::log2(1.0 + s) - std::log2(1.0 + e);
}

double see_value(const MatrixXcd& q_cov, const ChannelSet& ch, const SystemParams& params) {
  const double p_total = (std::real(q_cov.trace()) + params.p_c) / params.xi;
  return secrecy_rate(q_cov, ch, params) / p_total;
}

double interference_leakage(const MatrixXcd& q_cov, const VectorXcd& h_p) {
  return quad_form(q_cov, h_p);
}

double harvested_power(const MatrixXcd& q_cov, const VectorXcd& h_e, double zeta_eh) {
  if (!(zeta_eh > 0) || zeta_eh > 1)
    throw std::invalid_argument("harvested_power: zeta_eh must be in (0,1]");
  return zeta_eh * quad_form(q_cov, h_e);
}

RankOne principal_component(const MatrixXcd& q_cov) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(q_cov);
  const auto& evals = es.eigenvalues();  // ascending
  const int n = static_cast<int>(evals.size());
  RankOne out;
  const double l1 = evals(n - 1);
  const double l2 = n > 1 ? std::max(evals(n - 2), 0.0) : 0.0;
  if (!(l1 > 0)) {
    out.beam = VectorXcd::Zero(n);
    out.residual = 0.0;
    return out;
  }
  VectorXcd v = es.eigenvectors().col(n - 1);
  // phase convention: first entry of non-negligible magnitude made real >= 0
  const double vnorm = v.norm();
  for (int i = 0; i < n; ++i) {
    if (std::abs(v(i)) > 1e-12 * vnorm) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  out.beam = std::sqrt(l1) * v;
  out.residual = l2 / l1;
  return out;
}

RankOne rank_one_extract(const MatrixXcd& q_cov, double tol) {
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(q_cov, Eigen::EigenvaluesOnly);
  const int n = static_cast<int>(es.eigenvalues().size());
  if (!(es.eigenvalues()(n - 1) > 0)) throw RankOneError("ZeroMatrix");
  RankOne out = principal_component(q_cov);
  if (out.residual > tol) throw RankOneError("NotRankOne");
  return out;
}

bool validate_hermitian_psd(const MatrixXcd& m, double tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  if (((m - m.adjoint()).cwiseAbs().maxCoeff()) > tol) return false;
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0) >= -tol * std::real(m.trace());
}

}  // namespace see
