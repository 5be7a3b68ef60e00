#pragma once

#include <array>
#include <optional>
#include <vector>

#include "savanna/configuration.hpp"
#include "savanna/engine.hpp"
#include "savanna/rates.hpp"
#include "savanna/rng.hpp"

namespace savanna::diagnostics {

// Constants of the recovery argument for the truncated process. theta sits at
// the midpoint of its admissible interval; a0 is found by halving until the
// drift margin rho comes out positive; eps0 is the largest small-box scale
// compatible with a0, i.e. (1 - 4*eps0)^d = 1 - a0.
struct RecoveryConstants {
    double theta = 0.0;
    double a0 = 0.0;
    double rho = 0.0;
    double eps0 = 0.0;
    double t0 = 0.0;     // 2d / rho
    double alpha = 0.0;  // in (d/2, d)
    int d = 1;

    double lambda_for(int L) const { return a0 / (2.0 * L); }
    double t_limit(int L) const;  // t0 * log(L)
};

RecoveryConstants recovery_constants(const RateParams& p, int d, double a0_init = 0.05,
                                     double alpha = -1.0);

// Exponentially weighted population functional
//   Q(xi) = pref * sum_x e^{-lambda ||x||} w[xi(x)],  w = (0, 1, w2),
// with ||x|| the sup norm of torus-centered coordinates.
struct WeightSpec {
    double w2 = 1.0;
};
enum class QPrefactor { LambdaPowD, One };

struct QResult {
    double value = 0.0;
    double upper_bound = 0.0;  // w2 * e^{lambda/2} * 2^d d!, valid for lambda in (0,1]
    bool within_bound = true;
};

QResult q_functional(const Configuration& xi, double lambda, WeightSpec w, QPrefactor pre);

// sup-norm exponential integral over R^d: 2^d * d!
double supnorm_exp_integral(int d);

// Infinitesimal mean of Q along the truncated process, evaluated exactly:
//   lambda^d [ sum_{1} ((theta-1)w - mu) e^{-l||x||}
//            + sum_{0} beta N2(N(x))/(2L+1)^d e^{-l||x||}
//            - sum_{2} theta nu e^{-l||x||} ].
// The fast path reads N2 off box tallies; the slow path recounts sites and
// must agree exactly (identical terms, identical order).
double infinitesimal_mean_q(const Configuration& xi, const RecoveryConstants& rc,
                            const RateParams& p);
double infinitesimal_mean_q_slow(const Configuration& xi, const RecoveryConstants& rc,
                                 const RateParams& p);

// Extinction-side functionals for the constant-growth model, evaluated
// exactly. theta' sits at the midpoint of [beta/nu, (mu+w)/w], which is
// nonempty exactly when survival fails. The growth rate used is the maximal
// one, which dominates the grass-dependent model.
struct ExtinctionReport {
    double theta_prime = 0.0;
    double s_value = 0.0;         // S(eta)
    double mu_s = 0.0;            // exact drift of S
    double q_prime = 0.0;         // Q'(eta), prefactor 1
    double mu_qprime_bound = 0.0; // per-site upper bound on the Q' drift
    double coeff1 = 0.0;          // (theta'-1) w - mu
    double coeff2 = 0.0;          // beta e^{lambda' L} - theta' nu
};

ExtinctionReport extinction_functionals(const Configuration& eta, const RateParams& p,
                                        double lambda_prime);

// Sparse configurations with every sliding (2L+1)-window holding at most
// floor(max_fraction * (2L+1)^d) nonzero sites. This realizes "local density
// <= a0" at a scale where small boxes are too coarse to carry it.
Configuration sample_low_density(const Geometry& g, double max_fraction, int attempts,
                                 SplitMix64& rng, WindowSet ws = WindowSet::TreeOnly);

// Recovery time: first moment any small box reaches nonzero density a0,
// starting from ceil(L^alpha) nonzero sites in the origin box. Capped at
// t0 * log L; the exceed fraction is reported with a 95% binomial interval.
struct RecoveryEstimate {
    std::vector<double> tau;
    double t_limit = 0.0;
    double exceed_fraction = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
    double threshold = 0.0;  // a0 * |box|
    int seeded_sites = 0;
};

RecoveryEstimate estimate_recovery_time(const Geometry& g, const RateParams& p,
                                        const RecoveryConstants& rc, double alpha, int replicas,
                                        std::uint64_t seed);

// Branching random walk dominating the spread: no deaths, each particle
// branches at rate beta, offspring displaced uniformly on [-1,1]^d in units
// of L. Starts from one particle per origin-box site. Reports the empirical
// tail of the per-axis maximum against the analytic bound 2 e^{-mt} |box|.
struct BrwReport {
    double empirical_tail = 0.0;
    double bound = 0.0;
    double threshold = 0.0;           // rescaled units: 1 + (2 beta + m) t
    double cosh_const = 0.0;          // cosh(1) - 1
    std::array<double, 3> disp_mean{0, 0, 0};
    std::array<double, 3> disp_se{0, 0, 0};
    std::int64_t jumps = 0;
};

BrwReport simulate_brw_max(const Geometry& g, const RateParams& p, double t, int replicas,
                           std::uint64_t seed, double m, std::int64_t particle_cap = 2000000);

// One moving-particle trial over one time unit on the shared schedule:
// g0   = origin-box sites that carry a nonzero, see no death mark in [0,1]
//        and a growth mark in [0,1/2];
// s    = target-box sites with no death mark hit by an arrow from g0 in
//        (1/2,1);
// hv1  = nonzero sites of the constant-growth model in the target box at t=1.
struct MovingTrialResult {
    int h00 = 0;
    int g0 = 0;
    int s_count = 0;
    int hv1 = 0;
    bool success = false;
};

MovingTrialResult moving_particle_trial(const Geometry& g, const RateParams& p,
                                        const std::array<int, 3>& v, int initial_nonzero,
                                        std::uint64_t seed, double delta);

// First logged crossing within a box-index ball and a time window.
std::optional<BoxCrossing> detect_wet_box(const std::vector<BoxCrossing>& crossings,
                                          const Geometry& g, Site center_box, int box_radius,
                                          double t_lo, double t_hi);

// One realization of the compensated functional
//   M_t = Q(xi_t) - Q(xi_0) - int_0^t mu(xi_s) ds
// along the truncated process; the integrand is piecewise constant between
// flips, so the integral is exact.
struct DynkinResult {
    double m_t = 0.0;
    double q0 = 0.0, qt = 0.0;
    double integral_mu = 0.0;
    std::int64_t flips = 0;
};

DynkinResult dynkin_residual(Configuration xi, const RateParams& p, const RecoveryConstants& rc,
                             double t, std::uint64_t seed);

}  // namespace savanna::diagnostics
