#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace see {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using cxd = std::complex<double>;

// Natural-log <-> base-2 conversion constant.  All rates are in bits; solver
// internals work in nats and convert exactly once through this value.
inline constexpr double kLn2 = 0.69314718055994530941723212145818;

inline double db_to_watt(double dbw) { return std::pow(10.0, dbw / 10.0); }
inline double watt_to_db(double w) { return 10.0 * std::log10(w); }

/// Scalar network constants.  Powers and variances are in watts.
struct SystemParams {
  int n_t = 3;               // transmit antennas
  double sigma_su_sq = 1.0;  // equivalent noise variance at the legitimate receiver
  double sigma_er_sq = 1.0;  // equivalent noise variance at the energy receiver
  double p_c = 1.0;          // circuit power
  double xi = 1.0;           // amplifier efficiency
  double p_tx = 100.0;       // transmit power budget
  double p_f = 1.0;          // interference leakage tolerance
  double omega_s = 0.01;     // minimum harvested power
  double zeta_eh = 0.5;      // energy conversion efficiency
  double r_d = 0.5;          // target secrecy rate, bits/s/Hz

  void validate() const;
};

/// Outage probabilities for the statistical-CSI design.
struct OutageSpec {
  double alpha = 0.1;  // objective outage
  double beta = 0.1;   // secrecy-rate outage
  double gamma = 0.1;  // harvested-power outage

  void validate() const;
};

/// Channel data for one scenario.  Vectors of size zero mean "not present":
/// the perfect-CSI regime carries h_s/h_p/h_e, the statistical regime carries
/// h_s/h_p plus the eavesdropper covariance g_e, and the robust regime
/// carries estimates with ellipsoid radii.
struct ChannelSet {
  VectorXcd h_s, h_p, h_e;
  MatrixXcd g_e;
  VectorXcd h_s_hat, h_p_hat, h_e_hat;
  std::optional<double> eps_s, eps_p, eps_e;

  bool has_statistical() const { return g_e.size() > 0; }
  bool has_robust() const { return h_s_hat.size() > 0 && eps_s && eps_p && eps_e; }

  void validate(int n_t) const;
};

enum class Status { Optimal, Infeasible, MaxIterations };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "Optimal";
    case Status::Infeasible: return "Infeasible";
    case Status::MaxIterations: return "MaxIterations";
  }
  return "?";
}

/// Solution bundle returned by every design routine.
struct SolveReport {
  MatrixXcd q_cov;                    // optimal transmit covariance (watts)
  VectorXcd q_beam;                   // extracted beamformer, sqrt(watt) scale
  double see = 0.0;                   // bits/J/Hz
  double secrecy_rate = 0.0;          // bits/s/Hz
  double tx_power = 0.0;              // trace of q_cov
  std::vector<double> lambda_trace;   // outer-iteration parameter values
  std::vector<int> inner_iters;       // subproblem counts per outer iteration
  double residual = std::numeric_limits<double>::quiet_NaN();
  double rank_ratio = std::numeric_limits<double>::quiet_NaN();
  Status status = Status::Infeasible;

  int outer_iters() const { return static_cast<int>(inner_iters.size()); }
  int total_inner_iters() const {
    int n = 0;
    for (int k : inner_iters) n += k;
    return n;
  }
};

/// Outer/inner loop controls shared by the three designs.
struct DinkelbachConfig {
  double lambda0 = 0.0;
  double eps_outer = 1e-3;
  double zeta_inner = 1e-4;
  int max_outer = 50;
  int max_inner = 50;

  void validate() const;
};

}  // namespace see
