#include "savanna/meanfield.hpp"

#include <cmath>

namespace savanna::meanfield {

bool survival_condition(const RateParams& p, double omega_value) {
    return p.mu * p.nu < omega_value * (p.beta - p.nu);
}

std::array<std::array<double, 2>, 2> jacobian_at_origin(const RateParams& p, double omega_value) {
    return {{{-(omega_value + p.mu), p.beta}, {omega_value, -p.nu}}};
}

StabilityVerdict classify_origin(const RateParams& p, double omega_value) {
    const auto a = jacobian_at_origin(p, omega_value);
    StabilityVerdict v;
    v.trace = a[0][0] + a[1][1];
    v.determinant = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if (v.determinant < 0.0)
        v.kind = OriginKind::Unstable;
    else if (v.determinant > 0.0)
        v.kind = OriginKind::Attracting;
    else
        v.kind = OriginKind::Degenerate;
    return v;
}

namespace {

// Interior root for a fixed growth value w:
//   G* = (w+mu)nu / (beta w),  T* = w(1-G*)/(w+nu),  S* = nu T*/w.
// Admissible only when G* lies strictly inside (0,1).
bool solve_regime(const RateParams& p, double w, GSTState& out) {
    if (!(w > 0.0) || !(p.beta > 0.0)) return false;
    const double g = (w + p.mu) * p.nu / (p.beta * w);
    if (!(g > 0.0 && g < 1.0)) return false;
    const double t = w * (1.0 - g) / (w + p.nu);
    out = {g, p.nu * t / w, t};
    return true;
}

}  // namespace

std::vector<FixedPoint> interior_fixed_points(const RateParams& p) {
    p.validate();
    std::vector<FixedPoint> roots;
    GSTState x;
    if (p.omega.kind == GrowthKind::Constant) {
        if (solve_regime(p, p.omega.omega0, x)) roots.push_back({x, p.omega.omega0});
        return roots;
    }
    // Step form: a root solved with omega0 is consistent only if its grass
    // fraction stays below the threshold, and vice versa.
    const double thresh = 1.0 - p.omega.delta0;
    if (solve_regime(p, p.omega.omega0, x) && x.G < thresh) roots.push_back({x, p.omega.omega0});
    if (solve_regime(p, p.omega.omega1, x) && x.G >= thresh) roots.push_back({x, p.omega.omega1});
    return roots;
}

double ode_residual(const RateParams& p, const GSTState& x) {
    double ds, dt;
    gst_rhs(x.S, x.T, x.T, p.omega.at(x.G), p.beta, p.mu, p.nu, ds, dt);
    return std::max(std::fabs(ds), std::fabs(dt));
}

std::vector<TrajectoryPoint> integrate(const RateParams& p, const GSTState& x0, double t_end,
                                       double dt) {
    p.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
    if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
    if (std::fabs(x0.G + x0.S + x0.T - 1.0) > 1e-12 || x0.S < 0.0 || x0.T < 0.0 || x0.G < 0.0)
        throw std::invalid_argument("x0 must lie on the G+S+T=1 simplex");
    const double slack = 1e-9;
    auto check = [&](double s, double t) {
        if (s < -slack || t < -slack || s > 1.0 + slack || t > 1.0 + slack ||
            s + t > 1.0 + slack || !std::isfinite(s) || !std::isfinite(t))
            throw StepTooLarge("state left the simplex; reduce dt");
    };
    auto rhs = [&](double s, double t, double& ds, double& dTt) {
        gst_rhs(s, t, t, p.omega.at(1.0 - s - t), p.beta, p.mu, p.nu, ds, dTt);
    };

    std::vector<TrajectoryPoint> traj;
    const auto nsteps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12));
    traj.reserve(nsteps + 1);
    double s = x0.S, t = x0.T, time = 0.0;
    check(s, t);
    traj.push_back({0.0, {1.0 - s - t, s, t}});
    for (std::size_t i = 0; i < nsteps; ++i) {
        const double h = std::min(dt, t_end - time);
        double k1s, k1t, k2s, k2t, k3s, k3t, k4s, k4t;
        rhs(s, t, k1s, k1t);
        rhs(s + 0.5 * h * k1s, t + 0.5 * h * k1t, k2s, k2t);
        rhs(s + 0.5 * h * k2s, t + 0.5 * h * k2t, k3s, k3t);
        rhs(s + h * k3s, t + h * k3t, k4s, k4t);
        s += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        t += h / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
        time = (i + 1 == nsteps) ? t_end : time + h;
        check(s, t);
        traj.push_back({time, {1.0 - s - t, s, t}});
    }
    return traj;
}

}  // namespace savanna::meanfield
