#pragma once

#include "see/types.hpp"

namespace see {

struct RankOneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Achievable secrecy rate in bits/s/Hz.  May be negative; callers decide
/// how to interpret that.
double secrecy_rate(const MatrixXcd& q_cov, const ChannelSet& ch, const SystemParams& params);

/// Secrecy energy efficiency in bits/J/Hz: rate over (tr Q + P_c)/xi.
double see_value(const MatrixXcd& q_cov, const ChannelSet& ch, const SystemParams& params);

/// h_p^H Q h_p, watts.
double interference_leakage(const MatrixXcd& q_cov, const VectorXcd& h_p);

/// zeta_eh * h_e^H Q h_e, watts.
double harvested_power(const MatrixXcd& q_cov, const VectorXcd& h_e, double zeta_eh);

/// Real-valued quadratic form h^H Q h for Hermitian Q.
double quad_form(const MatrixXcd& q_cov, const VectorXcd& h);

struct RankOne {
  VectorXcd beam;   // sqrt(lambda_1) * v_1, first nonzero entry real >= 0
  double residual;  // lambda_2 / lambda_1
};

/// Principal-component split of a PSD matrix; never throws.  residual is the
/// ratio of the two largest eigenvalues (0 for dim-1 or zero matrices).
RankOne principal_component(const MatrixXcd& q_cov);

/// Contract form: throws RankOneError("ZeroMatrix") when the top eigenvalue
/// is not positive and RankOneError("NotRankOne") when residual > tol.
RankOne rank_one_extract(const MatrixXcd& q_cov, double tol = 1e-6);

/// Hermitian within tol (absolute, entrywise) and min eigenvalue >= -tol*trace.
bool validate_hermitian_psd(const MatrixXcd& m, double tol = 1e-8);

}  // namespace see
