#pragma once

#include <array>
#include <vector>

#include "savanna/rates.hpp"

namespace savanna::meanfield {

// Point on the (grass, sapling, tree) simplex.
struct GSTState {
    double G = 1.0;
    double S = 0.0;
    double T = 0.0;
};

enum class OriginKind { Unstable, Attracting, Degenerate };

struct StabilityVerdict {
    OriginKind kind = OriginKind::Degenerate;
    double determinant = 0.0;
    double trace = 0.0;
};

// Interior equilibrium together with the growth-rate value of the regime it
// was solved in (meaningful for the step form).
struct FixedPoint {
    GSTState state;
    double omega_value = 0.0;
};

struct TrajectoryPoint {
    double t = 0.0;
    GSTState x;
};

// Right-hand side of the density dynamics, written so that the spatial solver
// can reuse it verbatim with averaged inputs: DT is the local tree density
// seen by births and DG the grass density seen by the growth rate. The
// well-mixed case passes DT = T and omega evaluated at G itself.
inline void gst_rhs(double S, double T, double DT, double omega_eff, double beta, double mu,
                    double nu, double& dS, double& dT) {
    const double G = 1.0 - S - T;
    dS = beta * DT * G - mu * S - omega_eff * S;
    dT = omega_eff * S - nu * T;
}

// Strict inequality mu*nu < omega*(beta - nu); the boundary counts as false.
bool survival_condition(const RateParams& p, double omega_value);

// Linearization [[-(omega+mu), beta], [omega, -nu]] at the extinct state.
std::array<std::array<double, 2>, 2> jacobian_at_origin(const RateParams& p, double omega_value);

// Sign of the determinant decides; the trace is always negative.
StabilityVerdict classify_origin(const RateParams& p, double omega_value);

// Interior equilibria of the constant-growth dynamics. For the step form each
// growth regime is solved separately and only regime-consistent roots are
// kept. Empty result means no admissible interior root.
std::vector<FixedPoint> interior_fixed_points(const RateParams& p);

// Residual of the (S,T) equations at a point, infinity norm.
double ode_residual(const RateParams& p, const GSTState& x);

// Classic fixed-step 4th order integration of the reduced (S,T) system with
// G := 1-S-T. The growth rate is evaluated at the current state in every
// stage. Throws StepTooLarge if a sample leaves [-1e-9, 1+1e-9].
std::vector<TrajectoryPoint> integrate(const RateParams& p, const GSTState& x0, double t_end,
                                       double dt);

}  // namespace savanna::meanfield
