#include <cmath>
#include <sstream>

#include "doctest.h"
#include "savanna/ide.hpp"
#include "savanna/meanfield.hpp"
#include "savanna/rng.hpp"

using namespace savanna;
using namespace savanna::ide;

namespace {

RateParams theorem3_params() {
    RateParams p;
    p.beta = 10.0;
    p.mu = 0.5;
    p.nu = 0.5;
    p.omega = GrowthRate::step(1.0, 0.2, 0.05);
    return p;
}

Field random_field(int d, GridSpec spec, std::uint64_t seed, double scale = 1.0) {
    Field f(d, spec);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double s = rng.u01() * scale;
        const double t = rng.u01() * (scale - s > 0 ? scale - s : 0.0);
        f.s[i] = s;
        f.t[i] = t;
    }
    return f;
}

// the natural order for this system: more occupied mass and more trees
bool field_leq(const Field& a, const Field& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.t[i] > b.t[i] + 1e-15) return false;
        if (a.s[i] + a.t[i] > b.s[i] + b.t[i] + 1e-15) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("ide") {

TEST_CASE("window means: constants, half-space, and the direct oracle") {
    GridSpec spec{0.1, 4.0, 1.0};
    Field f(1, spec);
    for (std::size_t i = 0; i < f.size(); ++i) f.s[i] = 0.37;
    SummedAreaTable sat(f.s, 1, f.n());
    // interior windows reproduce the constant exactly
    CHECK(sat.window_mean({f.m(), 0, 0}, 10) == 0.37);
    CHECK(sat.window_mean({f.m() / 2, 0, 0}, 3) == 0.37);

    // indicator of a half-space: mean at the boundary is 1/2 up to h effects
    for (std::size_t i = 0; i < f.size(); ++i)
        f.s[i] = f.coord(static_cast<int>(i)) >= 0.0 ? 1.0 : 0.0;
    SummedAreaTable hs(f.s, 1, f.n());
    const double at_edge = hs.window_mean({f.m(), 0, 0}, 10);
    CHECK(std::fabs(at_edge - 0.5) < 0.1 / (2.0 * 1.0) + 1e-12);

    // random grid: table equals direct summation to 1e-12 relative
    SplitMix64 rng(5150);
    for (int d = 1; d <= 3; ++d) {
        GridSpec gs{0.25, d == 3 ? 2.0 : 4.0, 1.0};
        Field rf = random_field(d, gs, 99 + static_cast<std::uint64_t>(d));
        SummedAreaTable table(rf.s, d, rf.n());
        for (int trial = 0; trial < 200; ++trial) {
            std::array<int, 3> c{0, 0, 0};
            for (int k = 0; k < d; ++k)
                c[k] = static_cast<int>(rng.below(static_cast<std::uint64_t>(rf.n())));
            const int r = 1 + static_cast<int>(rng.below(6));
            const double a = table.window_mean(c, r);
            const double b = window_mean_direct(rf.s, d, rf.n(), c, r);
            CHECK(a == doctest::Approx(b).epsilon(1e-12));
        }
    }
}

TEST_CASE("window means are averages: bounded by the grid range") {
    GridSpec spec{0.1, 3.0, 1.0};
    Field f = random_field(1, spec, 7);
    SummedAreaTable sat(f.t, 1, f.n());
    double lo = 1e9, hi = -1e9;
    for (double v : f.t) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    lo = std::min(lo, 0.0);  // zero padding outside
    SplitMix64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        const std::array<int, 3> c{
            static_cast<int>(rng.below(static_cast<std::uint64_t>(f.n()))), 0, 0};
        const double v = sat.window_mean(c, 1 + static_cast<int>(rng.below(8)));
        CHECK(v >= lo - 1e-15);
        CHECK(v <= hi + 1e-15);
    }
}

TEST_CASE("all-grass field is a fixed point of the step") {
    RateParams p = theorem3_params();
    GridSpec spec{0.1, 3.0, 1.0};
    Field f(1, spec);
    Field g = step(f, p, 0.005);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(g.s[i] == 0.0);
        CHECK(g.t[i] == 0.0);
    }
    CHECK_THROWS_AS(step(f, p, 0.2 / 12.0), std::invalid_argument);  // dt over the cap
}

TEST_CASE("uniform interior reduces to the well-mixed step exactly") {
    RateParams p;
    p.beta = 2.0;
    p.mu = 0.5;
    p.nu = 0.5;
    p.omega = GrowthRate::constant(1.0);
    GridSpec spec{0.1, 6.0, 1.5};
    Field f(1, spec);
    const double s0 = 0.21, t0 = 0.34;
    for (std::size_t i = 0; i < f.size(); ++i) {
        f.s[i] = s0;
        f.t[i] = t0;
    }
    const double dt = 0.1 / (p.beta + p.mu + p.nu + p.omega.max());
    Field g = step(f, p, dt);
    double ds, dtv;
    meanfield::gst_rhs(s0, t0, t0, p.omega.at(1.0 - s0 - t0), p.beta, p.mu, p.nu, ds, dtv);
    const double expect_s = s0 + dt * ds;
    const double expect_t = t0 + dt * dtv;
    const int guard = static_cast<int>(std::lround(1.5 / spec.h)) + 1;
    for (int i = guard; i < f.n() - guard; ++i) {
        const auto idx = f.node({i, 0, 0});
        CHECK(std::fabs(g.s[idx] - expect_s) <= 1e-14);
        CHECK(std::fabs(g.t[idx] - expect_t) <= 1e-14);
    }
}

TEST_CASE("front constants at the worked parameter point") {
    const auto c = front_constants(theorem3_params(), 1.0, 1);
    CHECK(c.sigma0 == doctest::Approx(0.425).epsilon(1e-12));
    CHECK(c.gamma0 == doctest::Approx((0.5 + 10.0 * 0.575 / 3.0) / 2.0).epsilon(1e-12));
    CHECK(c.gamma0 == doctest::Approx(1.2083333333).epsilon(1e-9));
    CHECK(c.t0 == doctest::Approx(0.19245283).epsilon(1e-6));
    CHECK(c.s0 == doctest::Approx(0.23254717).epsilon(1e-6));
    CHECK(c.s0 + c.t0 == doctest::Approx(c.sigma0).epsilon(1e-12));
    CHECK(c.s0 / c.t0 == doctest::Approx(c.gamma0).epsilon(1e-12));
    CHECK(c.m_radius == 4.0);
    CHECK(c.eps_profile == doctest::Approx(std::min(c.eps_t1, c.eps_t2)));
    CHECK(c.eps_rate > 0.0);
    // interval membership
    CHECK(0.5 / 1.0 < c.gamma0);
    CHECK(c.gamma0 < 10.0 * (1.0 - c.sigma0) / (2.0 * 1.5));

    RateParams weak = theorem3_params();
    weak.beta = 1.4;  // 1.4 * 1 <= 2 * 0.5 * 1.5
    CHECK_THROWS_AS(front_constants(weak, 1.0, 1), HypothesisFails);
    RateParams wide = theorem3_params();
    wide.omega.delta0 = 0.2;  // above 2^-1 S0
    CHECK_THROWS_AS(front_constants(wide, 1.0, 1), HypothesisFails);
}

TEST_CASE("seed profiles: plateaus, ramps and Lipschitz bounds") {
    const auto c = front_constants(theorem3_params(), 1.0, 1);
    GridSpec spec{c.eps_profile / 8.0, c.m_radius + 2.5, 1.0};
    const Field f = build_seed_profiles(c, spec);
    const auto center = f.node({f.m(), f.m(), f.m()});
    CHECK(f.s[center] == doctest::Approx(c.s0));
    CHECK(f.t[center] == doctest::Approx(c.t0));
    // S vanishes at radius M and sits at half height mid-ramp
    const int at_m = f.m() + static_cast<int>(std::lround(c.m_radius / spec.h));
    CHECK(f.s[f.node({at_m, 0, 0})] == 0.0);
    const double half_r = c.m_radius - c.eps_profile / 2.0;
    const int at_half = f.m() + static_cast<int>(std::lround(half_r / spec.h));
    CHECK(f.s[f.node({at_half, 0, 0})] == doctest::Approx(c.s0 / 2.0).epsilon(0.05));
    // finite-difference slopes never exceed the ramp slopes
    double max_ds = 0.0, max_dt = 0.0;
    for (int i = 1; i < f.n(); ++i) {
        max_ds = std::max(max_ds,
                          std::fabs(f.s[f.node({i, 0, 0})] - f.s[f.node({i - 1, 0, 0})]));
        max_dt = std::max(max_dt,
                          std::fabs(f.t[f.node({i, 0, 0})] - f.t[f.node({i - 1, 0, 0})]));
    }
    CHECK(max_ds / spec.h <= c.s0 / c.eps_profile + 1e-9);
    CHECK(max_dt / spec.h <= c.t0 / c.eps_profile + 1e-9);

    CHECK_THROWS_AS(build_seed_profiles(c, GridSpec{c.eps_profile, c.m_radius + 2.5, 1.0}),
                    GridTooCoarse);
    CHECK_THROWS_AS(build_seed_profiles(c, GridSpec{c.eps_profile / 8.0, 2.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("derivative positivity holds at the worked point and fails off it") {
    const RateParams p = theorem3_params();
    const auto c = front_constants(p, 1.0, 1);
    GridSpec spec{c.eps_profile / 8.0, c.m_radius + 2.5, 1.0};
    const Field f = build_seed_profiles(c, spec);
    const auto chk = verify_seed_growth(f, c, p);
    CHECK(chk.omega_locked);
    CHECK(chk.pass_s);
    CHECK(chk.pass_t);
    CHECK(chk.pass);
    CHECK(chk.min_deriv_s >= chk.required - chk.tol);
    CHECK(chk.min_deriv_t >= chk.required - chk.tol);

    // raising the tree death rate past gamma0 * omega0 kills the T margin
    RateParams hot = p;
    hot.nu = 1.3;
    hot.mu = 1.3;
    const auto bad = verify_seed_growth(f, c, hot);
    CHECK_FALSE(bad.pass_t);
    CHECK_FALSE(bad.pass);

    // all-zero fields have zero derivatives: fail
    Field zero(1, spec);
    const auto z = verify_seed_growth(zero, c, p);
    CHECK(z.min_deriv_s == 0.0);
    CHECK(z.min_deriv_t == 0.0);
    CHECK_FALSE(z.pass);
}

TEST_CASE("positivity verification passes across sampled admissible parameters") {
    SplitMix64 rng(24601);
    int accepted = 0;
    while (accepted < 100) {
        RateParams probe;
        probe.beta = 2.0 + 18.0 * rng.u01();
        probe.mu = 0.1 + 1.5 * rng.u01();
        probe.nu = 0.05 + (probe.mu - 0.05) * rng.u01();
        const double w0 = 0.3 + 1.7 * rng.u01();
        const double w1 = w0 * 0.3 * rng.u01();
        const double kappa = 0.5 + 1.5 * rng.u01();
        probe.omega = GrowthRate::step(w0, w1, 0.01);
        FrontConstants c;
        try {
            c = front_constants(probe, kappa, 1);
            // re-derive with delta0 placed well inside its admissible range
            probe.omega.delta0 = 0.4 * c.s0 / 2.0;
            c = front_constants(probe, kappa, 1);
        } catch (const HypothesisFails&) {
            continue;
        }
        ++accepted;
        GridSpec spec{c.eps_profile / 4.0, c.m_radius + kappa + 1.0, kappa};
        const Field f = build_seed_profiles(c, spec);
        const auto chk = verify_seed_growth(f, c, probe);
        CHECK(chk.pass);
    }
}

TEST_CASE("comparison principle in the occupied-mass order") {
    RateParams p;
    p.beta = 1.5;
    p.mu = 0.8;
    p.nu = 0.4;
    p.omega = GrowthRate::step(1.0, 0.2, 0.3);
    const double dt = 0.1 / (p.beta + p.mu + p.nu + p.omega.max());
    GridSpec spec{0.25, 3.0, 1.0};
    SplitMix64 rng(31415);
    for (int pair = 0; pair < 100; ++pair) {
        Field hi = random_field(1, spec, 100 + static_cast<std::uint64_t>(pair), 0.9);
        Field lo(1, spec);
        for (std::size_t i = 0; i < hi.size(); ++i) {
            const double t = hi.t[i] * rng.u01();
            const double u = t + (hi.s[i] + hi.t[i] - t) * rng.u01();
            lo.t[i] = t;
            lo.s[i] = u - t;
        }
        REQUIRE(field_leq(lo, hi));
        for (int s = 0; s < 100; ++s) {
            hi = step(hi, p, dt);
            lo = step(lo, p, dt);
        }
        CHECK(field_leq(lo, hi));
    }
}

TEST_CASE("expanding front: radius grows and dominated data stays below") {
    const RateParams p = theorem3_params();
    const auto c = front_constants(p, 1.0, 1);
    GridSpec spec{c.eps_profile / 4.0, c.m_radius + 4.0, 1.0};
    Field f = build_seed_profiles(c, spec);
    const double dt = 0.1 / (p.beta + p.mu + p.nu + p.omega.max());

    Field still(1, spec);
    auto flat = run_front(still, p, dt, 1.0, 0.25, c.t0 / 2.0);
    for (double r : flat.radii) CHECK(r == 0.0);

    Field shrunk = f;
    for (std::size_t i = 0; i < f.size(); ++i) {
        shrunk.s[i] *= 0.8;
        shrunk.t[i] *= 0.8;
    }
    Field big = f;
    auto track = run_front(big, p, dt, 3.0, 0.5, c.t0 / 2.0);
    for (std::size_t i = 2; i < track.radii.size(); ++i)
        CHECK(track.radii[i] >= track.radii[i - 1] - 1e-12);  // nondecreasing after burn-in
    CHECK(track.radii.back() > track.radii.front());
    CHECK(track.slope > 0.0);

    // pointwise domination persists along the pair
    Field a = f, b = shrunk;
    for (int s = 0; s < 60; ++s) {
        a = step(a, p, dt);
        b = step(b, p, dt);
    }
    CHECK(field_leq(b, a));
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b.t[i] <= a.t[i] + 1e-15);
}

TEST_CASE("symmetric data stays symmetric") {
    const RateParams p = theorem3_params();
    const auto c = front_constants(p, 1.0, 1);
    GridSpec spec{c.eps_profile / 4.0, c.m_radius + 2.0, 1.0};
    Field f = build_seed_profiles(c, spec);  // radially symmetric by construction
    const double dt = 0.1 / (p.beta + p.mu + p.nu + p.omega.max());
    for (int s = 0; s < 40; ++s) f = step(f, p, dt);
    for (int i = 0; i < f.n(); ++i) {
        const auto l = f.node({i, 0, 0});
        const auto r = f.node({f.n() - 1 - i, 0, 0});
        CHECK(std::fabs(f.s[l] - f.s[r]) < 1e-12);
        CHECK(std::fabs(f.t[l] - f.t[r]) < 1e-12);
    }
}

TEST_CASE("field snapshots round trip") {
    GridSpec spec{0.125, 2.0, 1.5};
    Field f = random_field(2, spec, 4096);
    std::stringstream buf;
    save_field(f, buf);
    Field g = load_field(buf);
    CHECK(g.d() == f.d());
    CHECK(g.h() == f.h());
    CHECK(g.kappa() == f.kappa());
    REQUIRE(g.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(g.s[i] == f.s[i]);
        CHECK(g.t[i] == f.t[i]);
    }
    std::stringstream csv;
    write_csv_slice(f, csv);
    CHECK(csv.str().rfind("x,S,T", 0) == 0);
}

}  // TEST_SUITE
