#include "savanna/boxprocess.hpp"

namespace savanna::boxprocess {

std::int64_t BoxChainState::total_n1() const {
    std::int64_t s = 0;
    for (auto& [a, b] : counts) s += a;
    return s;
}

std::int64_t BoxChainState::total_n2() const {
    std::int64_t s = 0;
    for (auto& [a, b] : counts) s += b;
    return s;
}

BoxChainState lump(const Configuration& xi) {
    const Geometry& g = xi.geometry();
    BoxChainState z;
    z.counts.resize(static_cast<std::size_t>(g.nboxes));
    for (Site b = 0; b < g.nboxes; ++b) z.counts[static_cast<std::size_t>(b)] = xi.box_counts(b);
    return z;
}

std::vector<BoxTransition> box_chain_rates(const BoxChainState& z, const Geometry& g,
                                           const RateParams& p) {
    p.validate();
    if (static_cast<Site>(z.counts.size()) != g.nboxes)
        throw std::invalid_argument("state size does not match the box grid");
    const double omega = p.omega.min();
    const double denom = static_cast<double>(g.window_volume_L);
    std::vector<BoxTransition> out;
    for (Site b = 0; b < g.nboxes; ++b) {
        const auto [n1, n2] = z.counts[static_cast<std::size_t>(b)];
        if (n1 < 0 || n2 < 0 || n1 + n2 > g.box_volume)
            throw std::invalid_argument("box counts out of range");
        if (n1 > 0) {
            out.push_back({b, -1, 0, p.mu * n1});
            if (omega > 0.0) out.push_back({b, -1, +1, omega * n1});
        }
        if (n2 > 0) out.push_back({b, 0, -1, p.nu * n2});
        const int n0 = static_cast<int>(g.box_volume) - n1 - n2;
        if (n0 > 0) {
            std::int64_t s2 = 0;
            g.for_neighbor_boxes(b, [&](Site nb) {
                s2 += z.counts[static_cast<std::size_t>(nb)].second;
            });
            if (s2 > 0) {
                // same expression, same order, as the per-site rates summed
                // over the vacant sites of the box
                const double per_site = p.beta * static_cast<double>(s2) / denom;
                out.push_back({b, +1, 0, static_cast<double>(n0) * per_site});
            }
        }
    }
    return out;
}

BoxChainResult simulate_box_chain(BoxChainState z0, const Geometry& g, const RateParams& p,
                                  double horizon, std::uint64_t seed, double sample_dt) {
    SplitMix64 rng(derive_seed(seed, 0xb0c, 0));
    BoxChainResult out;
    double t = 0.0;
    out.samples.push_back({0.0, z0.total_n1(), z0.total_n2()});
    double next_sample = sample_dt > 0.0 ? sample_dt : horizon + 1.0;
    while (true) {
        auto rates = box_chain_rates(z0, g, p);
        double total = 0.0;
        for (auto& r : rates) total += r.rate;
        if (total <= 0.0) {
            t = horizon;
            break;
        }
        const double t_next = t + rng.exponential(total);
        while (next_sample <= t_next && next_sample <= horizon) {
            out.samples.push_back({next_sample, z0.total_n1(), z0.total_n2()});
            next_sample += sample_dt;
        }
        if (t_next > horizon) {
            t = horizon;
            break;
        }
        t = t_next;
        double u = rng.u01() * total;
        for (auto& r : rates) {
            if (u <= r.rate) {
                auto& [n1, n2] = z0.counts[static_cast<std::size_t>(r.box)];
                n1 += r.dn1;
                n2 += r.dn2;
                break;
            }
            u -= r.rate;
        }
        ++out.events;
    }
    out.samples.push_back({t, z0.total_n1(), z0.total_n2()});
    out.final_state = std::move(z0);
    return out;
}

BoxChainState reflect(const BoxChainState& z, const Geometry& g, int axis) {
    BoxChainState r;
    r.counts.resize(z.counts.size());
    const int nb = g.boxes_per_dim;
    for (Site b = 0; b < g.nboxes; ++b) {
        auto c = g.box_coords(b);
        c[axis] = (nb - c[axis]) % nb;
        r.counts[static_cast<std::size_t>(g.box_index(c))] =
            z.counts[static_cast<std::size_t>(b)];
    }
    return r;
}

}  // namespace savanna::boxprocess
