#pragma once

#include <cstdint>
#include <variant>

#include "see/rng.hpp"
#include "see/types.hpp"

namespace see {

/// Channel generation controls.  Distances are normalized (all 1 by default).
struct ChannelGenConfig {
  int n_t = 3;
  double d_s = 1.0, d_p = 1.0, d_e = 1.0;
  double pathloss_exp = 2.7;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Perfect {};
struct Statistical {
  double g_e_scale = 0.1;  // a^2 in G_e = a^2 I
};
struct Ellipsoidal {
  double eps_s = 0.1, eps_p = 0.1, eps_e = 0.1;
};
using Regime = std::variant<Perfect, Statistical, Ellipsoidal>;

/// i.i.d. CN(0,1) entries scaled by sqrt(d^-alpha).
VectorXcd sample_rayleigh_channel(int n_t, double d, double pathloss_exp, Rng& rng);

/// Assembles a scenario for one regime.  Draw order is fixed (h_s, h_p, h_e)
/// so results are reproducible from the config seed alone.
ChannelSet make_scenario(const SystemParams& params, const Regime& regime,
                         const ChannelGenConfig& cfg);

/// h_hat + e with ||e|| <= eps; the direction is uniform on the unit sphere
/// and the radius is eps*u^(1/(2 n_t)) (uniform in the ball).  boundary=true
/// forces ||e|| = eps.
VectorXcd sample_ellipsoid_perturbation(const VectorXcd& h_hat, double eps, Rng& rng,
                                        bool boundary = false);

/// Draw h ~ CN(0, g_e) through an eigenvalue factorization with clipping at 0.
VectorXcd sample_gaussian_channel(const MatrixXcd& g_e, Rng& rng);

struct SeeBelow {
  double delta;
};
struct RateBelow {
  double r_d;
};
struct HarvestBelow {
  double omega_s;
};
using OutageKind = std::variant<SeeBelow, RateBelow, HarvestBelow>;

/// Monte Carlo outage frequency under h_e ~ CN(0, g_e).  h_s is required for
/// the rate/efficiency events and may be empty for HarvestBelow.  Sampling is
/// chunked with per-chunk derived streams, so the result does not depend on
/// the number of threads.
double empirical_outage(const MatrixXcd& q_cov, const MatrixXcd& g_e, const VectorXcd& h_s,
                        const SystemParams& params, const OutageKind& kind, int n_samples,
                        std::uint64_t seed);

/// Serial reference for the kernel above; bit-identical results.
double empirical_outage_serial(const MatrixXcd& q_cov, const MatrixXcd& g_e,
                               const VectorXcd& h_s, const SystemParams& params,
                               const OutageKind& kind, int n_samples, std::uint64_t seed);

}  // namespace see
