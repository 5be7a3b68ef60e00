#include <cmath>

#include "doctest.h"
#include "savanna/meanfield.hpp"
#include "savanna/rng.hpp"

using namespace savanna;
using namespace savanna::meanfield;

namespace {

RateParams make(double beta, double mu, double nu, double omega) {
    RateParams p;
    p.beta = beta;
    p.mu = mu;
    p.nu = nu;
    p.omega = GrowthRate::constant(omega);
    return p;
}

// Independent classification through the eigenvalues of the linearization.
OriginKind eigen_classify(const std::array<std::array<double, 2>, 2>& a) {
    const double tr = a[0][0] + a[1][1];
    const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    const double disc = tr * tr - 4.0 * det;
    double max_re;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        max_re = std::max((tr + root) / 2.0, (tr - root) / 2.0);
    } else {
        max_re = tr / 2.0;
    }
    if (max_re < 0.0) return OriginKind::Attracting;
    if (max_re > 0.0) return OriginKind::Unstable;
    return OriginKind::Degenerate;
}

}  // namespace

TEST_SUITE("meanfield") {

TEST_CASE("survival condition is the strict determinant inequality") {
    CHECK(survival_condition(make(2, 0.5, 0.5, 1), 1.0));
    CHECK_FALSE(survival_condition(make(1.2, 1.5, 1, 1), 1.0));
    // boundary: 0.5 = 0.5, strict inequality fails
    CHECK_FALSE(survival_condition(make(1.5, 0.5, 1, 1), 1.0));
}

TEST_CASE("linearization at the extinct state") {
    const auto a = jacobian_at_origin(make(2, 0.5, 0.5, 1), 1.0);
    CHECK(a[0][0] == -1.5);
    CHECK(a[0][1] == 2.0);
    CHECK(a[1][0] == 1.0);
    CHECK(a[1][1] == -0.5);
    CHECK(a[0][0] * a[1][1] - a[0][1] * a[1][0] == doctest::Approx(-1.25).epsilon(1e-15));

    RateParams zero;
    zero.beta = zero.mu = zero.nu = 0.0;
    zero.omega = GrowthRate::constant(0.0);
    const auto z = jacobian_at_origin(zero, 0.0);
    CHECK(z[0][0] == 0.0);
    CHECK(z[0][1] == 0.0);
    CHECK(z[1][0] == 0.0);
    CHECK(z[1][1] == 0.0);
}

TEST_CASE("origin classification by determinant sign") {
    auto v1 = classify_origin(make(2, 0.5, 0.5, 1), 1.0);
    CHECK(v1.kind == OriginKind::Unstable);
    CHECK(v1.determinant == doctest::Approx(-1.25));
    auto v2 = classify_origin(make(1.2, 1.5, 1, 1), 1.0);
    CHECK(v2.kind == OriginKind::Attracting);
    CHECK(v2.determinant == doctest::Approx(1.3));
    auto v3 = classify_origin(make(1.5, 0.5, 1, 1), 1.0);
    CHECK(v3.kind == OriginKind::Degenerate);
    CHECK(v3.determinant == 0.0);
    CHECK(v3.trace < 0.0);
}

TEST_CASE("determinant verdict agrees with the eigenvalue route") {
    SplitMix64 rng(20240901);
    int checked = 0;
    while (checked < 10000) {
        RateParams p = make(0.05 + 5.0 * rng.u01(), 0.05 + 5.0 * rng.u01(), 0.0, 0.0);
        p.nu = 0.05 + (p.mu - 0.05) * rng.u01();  // keep mu >= nu
        const double w = 0.05 + 3.0 * rng.u01();
        p.omega = GrowthRate::constant(w);
        const auto verdict = classify_origin(p, w);
        if (verdict.kind == OriginKind::Degenerate) continue;  // grid avoids exact zeros
        CHECK(verdict.kind == eigen_classify(jacobian_at_origin(p, w)));
        CHECK(verdict.trace < 0.0);
        ++checked;
    }
}

TEST_CASE("interior equilibrium in the survival regime") {
    const auto roots = interior_fixed_points(make(2, 0.5, 0.5, 1));
    REQUIRE(roots.size() == 1);
    const auto& x = roots[0].state;
    CHECK(x.G == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(x.S == doctest::Approx(0.2083333333333333).epsilon(1e-12));
    CHECK(x.T == doctest::Approx(0.4166666666666667).epsilon(1e-12));
    CHECK(ode_residual(make(2, 0.5, 0.5, 1), x) < 1e-12);
}

TEST_CASE("no interior equilibrium outside the survival regime") {
    CHECK(interior_fixed_points(make(1.2, 1.5, 1, 1)).empty());  // G* = 2.5/1.2 > 1
    CHECK(interior_fixed_points(make(1.0, 1.2, 1.0, 1)).empty());  // beta = nu forces G* >= 1
}

TEST_CASE("step growth keeps only regime-consistent roots") {
    RateParams p = make(4, 0.5, 0.5, 0);
    p.omega = GrowthRate::step(2.0, 0.01, 0.5);
    for (const auto& r : interior_fixed_points(p)) {
        if (r.omega_value == 2.0) CHECK(r.state.G < 0.5);
        else CHECK(r.state.G >= 0.5);
        CHECK(ode_residual(p, r.state) < 1e-10);
    }
}

TEST_CASE("survival implies an interior root for constant growth") {
    SplitMix64 rng(77);
    int feasible = 0;
    while (feasible < 2000) {
        RateParams p = make(0.1 + 5.0 * rng.u01(), 0.05 + 3.0 * rng.u01(), 0.0, 0.0);
        p.nu = 0.05 + (p.mu - 0.05) * rng.u01();
        const double w = 0.05 + 3.0 * rng.u01();
        p.omega = GrowthRate::constant(w);
        if (!survival_condition(p, w)) continue;
        ++feasible;
        const auto roots = interior_fixed_points(p);
        REQUIRE(roots.size() == 1);
        CHECK(ode_residual(p, roots[0].state) < 1e-10);
    }
}

TEST_CASE("all-grass state is absorbing for the flow") {
    const auto traj = integrate(make(2, 0.5, 0.5, 1), {1, 0, 0}, 5.0, 0.01);
    CHECK(traj.front().t == 0.0);
    CHECK(traj.back().t == 5.0);
    for (const auto& pt : traj) {
        CHECK(pt.x.S == 0.0);
        CHECK(pt.x.T == 0.0);
    }
}

TEST_CASE("flow converges to the interior equilibrium") {
    const RateParams p = make(2, 0.5, 0.5, 1);
    const auto traj = integrate(p, {0.4, 0.3, 0.3}, 200.0, 0.01);
    const auto& last = traj.back().x;
    CHECK(std::fabs(last.G - 0.375) < 1e-6);
    CHECK(std::fabs(last.S - 0.2083333333333333) < 1e-6);
    CHECK(std::fabs(last.T - 0.4166666666666667) < 1e-6);
}

TEST_CASE("flow decays to the origin when it is attracting") {
    const auto traj = integrate(make(1.2, 1.5, 1, 1), {0.98, 0.01, 0.01}, 200.0, 0.01);
    CHECK(traj.back().x.S < 1e-8);
    CHECK(traj.back().x.T < 1e-8);
}

TEST_CASE("trajectories stay on the simplex for admissible steps") {
    SplitMix64 rng(404);
    for (int i = 0; i < 50; ++i) {
        RateParams p = make(0.2 + 4.0 * rng.u01(), 0.1 + 2.0 * rng.u01(), 0.0, 0.0);
        p.nu = 0.05 + (p.mu - 0.05) * rng.u01();
        p.omega = GrowthRate::constant(0.1 + 2.0 * rng.u01());
        const double s = rng.u01(), t = (1.0 - s) * rng.u01();
        const double dt = 0.01 / (p.beta + p.mu + p.nu + p.omega.max());
        const auto traj = integrate(p, {1.0 - s - t, s, t}, 5.0, dt);
        for (const auto& pt : traj) {
            CHECK(pt.x.G + pt.x.S + pt.x.T == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(pt.x.S > -1e-9);
            CHECK(pt.x.T > -1e-9);
            CHECK(pt.x.S < 1.0 + 1e-9);
            CHECK(pt.x.T < 1.0 + 1e-9);
        }
    }
}

TEST_CASE("oversized steps are rejected, not clamped") {
    CHECK_THROWS_AS(integrate(make(2, 0.5, 0.5, 1), {0.4, 0.3, 0.3}, 300.0, 100.0),
                    StepTooLarge);
    CHECK_THROWS_AS(integrate(make(2, 0.5, 0.5, 1), {0.5, 0.3, 0.3}, 1.0, 0.01),
                    std::invalid_argument);  // off the simplex
}

TEST_CASE("step growth evaluates on the current side of the threshold") {
    RateParams p = make(2, 0.5, 0.5, 0);
    p.omega = GrowthRate::step(1.0, 0.2, 0.3);
    CHECK(p.omega.at(0.69) == 1.0);
    CHECK(p.omega.at(0.7) == 0.2);  // threshold value takes the high-grass rate
    CHECK(p.omega.at(0.71) == 0.2);
    const auto traj = integrate(p, {0.4, 0.3, 0.3}, 50.0, 0.005);
    CHECK(traj.back().t == 50.0);
}

}  // TEST_SUITE
