#include <sstream>

#include "doctest.h"
#include "savanna/configuration.hpp"
#include "savanna/rng.hpp"

using namespace savanna;

TEST_SUITE("lattice") {

TEST_CASE("geometry validation") {
    CHECK_THROWS_AS(Geometry(1, 10, 1.0, 0.05, 80), std::invalid_argument);  // ell = 0
    CHECK_THROWS_AS(Geometry(1, 10, 1.0, 0.3, 80), std::invalid_argument);   // 80 % 6 != 0
    CHECK_THROWS_AS(Geometry(1, 10, 1.0, 0.1, 20), std::invalid_argument);   // window > period
    CHECK_THROWS_AS(Geometry(1, 10, 1.0, 0.2, 81), std::invalid_argument);   // not divisible
    const Geometry g(1, 10, 1.0, 0.1, 80);
    CHECK(g.ell == 1);
    CHECK(g.boxes_per_dim == 40);
    CHECK(g.box_volume == 2);
    CHECK(g.window_volume_L == 21);
}

TEST_CASE("local fractions on uniform and single-site states") {
    const Geometry g(1, 2, 1.0, 0.5, 20);
    Configuration c(g);
    for (Site x = 0; x < g.nsites; ++x) {
        CHECK(c.local_fraction(x, 0, g.L) == 1.0);
        CHECK(c.local_fraction(x, 2, g.L) == 0.0);
    }
    c.apply_flip(0, 2);
    CHECK(c.local_fraction(0, 2, g.L) == doctest::Approx(1.0 / 5.0));  // one site in a 5-window
    CHECK(c.local_fraction(2, 2, g.L) == doctest::Approx(1.0 / 5.0));
    CHECK(c.local_fraction(3, 2, g.L) == 0.0);
    CHECK(c.local_fraction(g.nsites - 2, 2, g.L) == doctest::Approx(1.0 / 5.0));  // wraps
}

TEST_CASE("maintained windows equal brute-force recounts") {
    for (int d : {1, 2}) {
        const int side = d == 1 ? 64 : 24;
        const Geometry g(d, 4, 1.5, 0.3, side);  // kradius = 6
        Configuration c(g);
        SplitMix64 rng(99 + d);
        for (int i = 0; i < 4000; ++i) {
            const Site x = static_cast<Site>(rng.below(static_cast<std::uint64_t>(g.nsites)));
            const int to = static_cast<int>(rng.below(3));
            if (c.state(x) == to) continue;
            c.apply_flip(x, to);
        }
        CHECK(c.verify_counts());
        // fast path equals slow recount at every site
        for (Site x = 0; x < g.nsites; ++x) {
            CHECK(c.window2(x) == c.count_in_window(x, 2, g.L));
            CHECK(c.window0k(x) == c.count_in_window(x, 0, g.kradius));
        }
    }
}

TEST_CASE("flip and reverse flip restore all counts") {
    const Geometry g(2, 4, 1.0, 0.3, 24);
    Configuration c(g);
    SplitMix64 rng(7);
    for (int i = 0; i < 500; ++i)
        if (const Site x = static_cast<Site>(rng.below(static_cast<std::uint64_t>(g.nsites)));
            c.state(x) == 0)
            c.apply_flip(x, 1 + static_cast<int>(rng.below(2)));
    const auto w2 = c.window2(5), w0 = c.window0k(5);
    const Site probe = 30;
    const int old_state = c.state(probe);
    c.apply_flip(probe, old_state == 2 ? 0 : 2);
    c.apply_flip(probe, old_state);
    CHECK(c.window2(5) == w2);
    CHECK(c.window0k(5) == w0);
    CHECK(c.verify_counts());
}

TEST_CASE("box counts track the state exactly") {
    const Geometry g(2, 4, 1.0, 0.3, 32);  // ell = 1, boxes of 4 sites
    Configuration c(g);
    for (Site b = 0; b < g.nboxes; ++b) {
        auto [n1, n2] = c.box_counts(b);
        CHECK(n1 == 0);
        CHECK(n2 == 0);
    }
    for (Site s : g.box_sites(3)) c.apply_flip(s, 2);
    CHECK(c.box_counts(3) == std::pair<int, int>{0, 4});
    SplitMix64 rng(123);
    for (int i = 0; i < 2000; ++i) {
        const Site x = static_cast<Site>(rng.below(static_cast<std::uint64_t>(g.nsites)));
        const int to = static_cast<int>(rng.below(3));
        if (c.state(x) != to) c.apply_flip(x, to);
    }
    std::int64_t mass = 0;
    for (Site b = 0; b < g.nboxes; ++b) {
        int n1 = 0, n2 = 0;
        for (Site s : g.box_sites(b)) {
            n1 += c.state(s) == 1;
            n2 += c.state(s) == 2;
        }
        auto [m1, m2] = c.box_counts(b);
        CHECK(m1 == n1);
        CHECK(m2 == n2);
        mass += m1 + m2;
    }
    CHECK(mass == c.nonzero());
}

TEST_CASE("truncated neighborhood satisfies the sandwich") {
    const Geometry g(1, 10, 1.0, 0.1, 80);  // ell = 1
    const auto n0 = g.truncated_neighborhood(0);
    std::vector<bool> member(static_cast<std::size_t>(g.nsites), false);
    for (Site s : n0) member[static_cast<std::size_t>(s)] = true;
    for (Site x = 0; x < g.nsites; ++x) {
        const int dist = g.sup_norm_from_origin(x);
        if (dist <= 6) CHECK(member[static_cast<std::size_t>(x)]);       // (1-4eps0)L = 6
        if (member[static_cast<std::size_t>(x)]) CHECK(dist <= g.L);
    }
    // same box, same neighborhood
    CHECK(g.truncated_neighborhood(0) == g.truncated_neighborhood(1));
}

TEST_CASE("neighborhood sandwich holds for every box at several scales") {
    struct Case {
        int L;
        double eps0;
        int side;
    };
    for (const auto& [L, eps0, side] : {Case{5, 0.2, 40}, Case{10, 0.15, 40}, Case{12, 0.24, 48}}) {
        const Geometry g(1, L, 1.0, eps0, side);
        const int inner = static_cast<int>((1.0 - 4.0 * g.ell / static_cast<double>(g.L)) * g.L);
        for (Site b = 0; b < g.nboxes; ++b) {
            const Site x = g.box_sites(b)[0];
            std::vector<bool> member(static_cast<std::size_t>(g.nsites), false);
            for (Site s : g.truncated_neighborhood(x)) member[static_cast<std::size_t>(s)] = true;
            for (Site y = 0; y < g.nsites; ++y) {
                const auto cx = g.site_coords(x), cy = g.site_coords(y);
                int dist = 0;
                for (int k = 0; k < g.d; ++k) {
                    int u = std::abs(cx[k] - cy[k]);
                    u = std::min(u, g.side - u);
                    dist = std::max(dist, u);
                }
                if (dist <= inner) CHECK(member[static_cast<std::size_t>(y)]);
                if (member[static_cast<std::size_t>(y)]) CHECK(dist <= g.L);
            }
        }
    }
}

TEST_CASE("neighborhood membership is symmetric") {
    const Geometry g(1, 8, 1.0, 0.24, 32);
    for (Site x = 0; x < g.nsites; ++x)
        for (Site y = 0; y < g.nsites; ++y)
            CHECK(g.boxes_within_range(g.box_of_site(x), g.box_of_site(y)) ==
                  g.boxes_within_range(g.box_of_site(y), g.box_of_site(x)));
}

TEST_CASE("neighborhood commutes with the tiling reflection") {
    // the aligned tiling is symmetric under y -> 2*ell - 1 - y per axis
    const Geometry g(1, 10, 1.0, 0.15, 80);
    auto reflect = [&](Site s) {
        auto c = g.site_coords(s);
        c[0] = g.wrap(2 * g.ell - 1 - c[0]);
        return g.site_index(c);
    };
    for (Site x : {Site(0), Site(3), Site(17)}) {
        auto lhs = g.truncated_neighborhood(reflect(x));
        auto rhs = g.truncated_neighborhood(x);
        for (Site& s : rhs) s = reflect(s);
        std::sort(lhs.begin(), lhs.end());
        std::sort(rhs.begin(), rhs.end());
        CHECK(lhs == rhs);
    }
}

TEST_CASE("snapshot round trip is bit exact") {
    const Geometry g(2, 4, 1.25, 0.3, 24);
    Configuration c(g);
    SplitMix64 rng(31337);
    for (int i = 0; i < 300; ++i) {
        const Site x = static_cast<Site>(rng.below(static_cast<std::uint64_t>(g.nsites)));
        const int to = static_cast<int>(rng.below(3));
        if (c.state(x) != to) c.apply_flip(x, to);
    }
    std::stringstream buf;
    c.save(buf);
    const std::string first = buf.str();
    Configuration back = Configuration::load(buf);
    CHECK(back.geometry().d == g.d);
    CHECK(back.geometry().kappa == g.kappa);
    CHECK(back.geometry().epsilon0 == g.epsilon0);
    for (Site x = 0; x < g.nsites; ++x) CHECK(back.state(x) == c.state(x));
    CHECK(back.verify_counts());
    std::stringstream buf2;
    back.save(buf2);
    CHECK(buf2.str() == first);
}

TEST_CASE("grass-frozen boundary counts the outside as grass") {
    const Geometry g(1, 4, 1.0, 0.3, 16, Boundary::GrassFrozen);
    Configuration c(g);
    // full window volume even where the window sticks out of the domain
    CHECK(c.window0k(0) == g.window_volume_k);
    c.apply_flip(0, 2);
    CHECK(c.window2(0) == 1);
    CHECK(c.window2(4) == 1);
    CHECK(c.window2(5) == 0);         // no wrap back
    CHECK(c.window0k(0) == g.window_volume_k - 1);
    CHECK(c.verify_counts());
}

}  // TEST_SUITE
