#include "savanna/engine.hpp"

#include <cmath>

namespace savanna {

namespace {

// Swap-erase index set over sites, O(1) insert/erase/pick.
class SiteList {
public:
    explicit SiteList(Site nsites) : pos_(static_cast<std::size_t>(nsites), -1) {}

    void insert(Site x) {
        pos_[static_cast<std::size_t>(x)] = static_cast<std::int32_t>(items_.size());
        items_.push_back(x);
    }
    void erase(Site x) {
        const auto i = pos_[static_cast<std::size_t>(x)];
        const Site last = items_.back();
        items_[static_cast<std::size_t>(i)] = last;
        pos_[static_cast<std::size_t>(last)] = i;
        items_.pop_back();
        pos_[static_cast<std::size_t>(x)] = -1;
    }
    Site pick(SplitMix64& rng) const {
        return items_[static_cast<std::size_t>(rng.below(items_.size()))];
    }
    std::int64_t size() const { return static_cast<std::int64_t>(items_.size()); }

private:
    std::vector<Site> items_;
    std::vector<std::int32_t> pos_;
};

// Decode a flat window offset into a target site; -1 when it leaves a frozen
// domain. Offsets enumerate x + [-L, L]^d in row-major order.
Site window_target(const Geometry& g, Site x, std::uint64_t flat) {
    const Geometry::Coords c = g.site_coords(x);
    Geometry::Coords q{0, 0, 0};
    for (int k = g.d - 1; k >= 0; --k) {
        const int o = static_cast<int>(flat % (2 * g.L + 1)) - g.L;
        flat /= (2 * g.L + 1);
        int v = c[k] + o;
        if (g.boundary == Boundary::Torus) {
            v = g.wrap(v);
        } else if (v < 0 || v >= g.side) {
            return -1;
        }
        q[k] = v;
    }
    return g.site_index(q);
}

double growth_acceptance(const Configuration& c, const RateParams& p, Site x) {
    const double f0 = c.local_fraction(x, 0, c.geometry().kradius);
    return p.omega.at(f0) / p.omega.max();
}

}  // namespace

RunResult run_model(ModelKind kind, Configuration& c, const RateParams& p, double horizon,
                    std::uint64_t seed, const RunOptions& opt) {
    p.validate();
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be >= 0");
    const Geometry& g = c.geometry();
    if (kind == ModelKind::StaverLevin && p.omega.kind == GrowthKind::Step &&
        c.windows() != WindowSet::TreeAndGrass)
        throw std::invalid_argument("state-dependent growth needs the grass window");

    SplitMix64 rng(derive_seed(seed, 0xe17, 0));
    SiteList ones(g.nsites), twos(g.nsites);
    for (Site x = 0; x < g.nsites; ++x) {
        if (c.state(x) == 1) ones.insert(x);
        if (c.state(x) == 2) twos.insert(x);
    }

    const double w_growth =
        kind == ModelKind::StaverLevin ? p.omega.max() : p.omega.min();
    const double box_thr = opt.box_crossing_frac >= 0.0
                               ? opt.box_crossing_frac * static_cast<double>(g.box_volume)
                               : -1.0;

    RunResult out;
    out.samples.push_back({0.0, {c.total(0), c.total(1), c.total(2)}});
    double next_sample = opt.sample_dt > 0.0 ? opt.sample_dt : horizon + 1.0;
    double t = 0.0;

    // initial configuration may already satisfy the crossing threshold
    if (box_thr >= 0.0) {
        for (Site b = 0; b < g.nboxes; ++b) {
            auto [n1, n2] = c.box_counts(b);
            if (n1 + n2 >= box_thr) {
                out.crossings.push_back({0.0, b});
                if (opt.stop_at_first_crossing) {
                    out.final_time = 0.0;
                    out.samples.push_back({0.0, {c.total(0), c.total(1), c.total(2)}});
                    return out;
                }
            }
        }
    }

    auto flip = [&](Site x, int to) {
        const int from = c.state(x);
        if (opt.before_flip) opt.before_flip(t);
        Site box = g.box_of_site(x);
        auto [b1, b2] = c.box_counts(box);
        const int before = b1 + b2;
        c.apply_flip(x, to);
        if (from == 1) ones.erase(x);
        if (from == 2) twos.erase(x);
        if (to == 1) ones.insert(x);
        if (to == 2) twos.insert(x);
        ++out.flip_count;
        if (opt.record_flips)
            out.flips.push_back({t, x, static_cast<std::uint8_t>(from),
                                 static_cast<std::uint8_t>(to)});
        if (box_thr >= 0.0) {
            auto [a1, a2] = c.box_counts(box);
            if (before < box_thr && a1 + a2 >= box_thr) out.crossings.push_back({t, box});
        }
    };

    while (true) {
        const double n1 = static_cast<double>(ones.size());
        const double n2 = static_cast<double>(twos.size());
        const double r_death1 = p.mu * n1;
        const double r_growth = w_growth * n1;
        const double r_death2 = p.nu * n2;
        const double r_birth = p.beta * n2;
        const double total = r_death1 + r_growth + r_death2 + r_birth;
        if (total <= 0.0) {
            t = horizon;  // absorbing
            break;
        }
        const double t_next = t + rng.exponential(total);
        while (next_sample <= t_next && next_sample <= horizon) {
            out.samples.push_back({next_sample, {c.total(0), c.total(1), c.total(2)}});
            next_sample += opt.sample_dt;
        }
        if (t_next > horizon) {
            t = horizon;
            break;
        }
        t = t_next;
        ++out.proposals;

        double u = rng.u01() * total;
        if (u <= r_death1) {
            flip(ones.pick(rng), 0);
        } else if ((u -= r_death1) <= r_growth) {
            const Site x = ones.pick(rng);
            bool accept = true;
            if (kind == ModelKind::StaverLevin)
                accept = rng.u01() <= growth_acceptance(c, p, x);
            if (accept) flip(x, 2);
        } else if ((u -= r_growth) <= r_death2) {
            flip(twos.pick(rng), 0);
        } else {
            const Site x = twos.pick(rng);
            const Site y =
                window_target(g, x, rng.below(static_cast<std::uint64_t>(g.window_volume_L)));
            if (y >= 0 &&
                (kind != ModelKind::Truncated ||
                 g.boxes_within_range(g.box_of_site(x), g.box_of_site(y))) &&
                c.state(y) == 0)
                flip(y, 1);
        }

        if (!out.crossings.empty() && opt.stop_at_first_crossing) break;
        if (opt.max_flips >= 0 && out.flip_count >= opt.max_flips) break;
        if (opt.stop_when_empty && ones.size() + twos.size() == 0) break;
    }

    out.final_time = t;
    out.samples.push_back({t, {c.total(0), c.total(1), c.total(2)}});
    return out;
}

std::vector<Transition> enumerate_transitions(ModelKind kind, const Configuration& c,
                                              const RateParams& p) {
    const Geometry& g = c.geometry();
    std::vector<Transition> out;
    const double denom = static_cast<double>(g.window_volume_L);
    for (Site x = 0; x < g.nsites; ++x) {
        switch (c.state(x)) {
            case 1: {
                out.push_back({x, 0, p.mu});
                double w = kind == ModelKind::StaverLevin
                               ? p.omega.at(c.local_fraction(x, 0, g.kradius))
                               : p.omega.min();
                if (w > 0.0) out.push_back({x, 2, w});
                break;
            }
            case 2:
                out.push_back({x, 0, p.nu});
                break;
            default: {
                const double n2 = kind == ModelKind::Truncated
                                      ? static_cast<double>(c.n2_truncated(x))
                                      : static_cast<double>(c.window2(x));
                if (n2 > 0.0) out.push_back({x, 1, p.beta * n2 / denom});
                break;
            }
        }
    }
    return out;
}

namespace {

bool apply_mark_one(Configuration& c, ModelKind kind, const Mark& m, const RateParams& p,
                    double birth_thinning) {
    switch (m.stream) {
        case StreamKind::Death12:
            if (c.state(m.site) != 0) {
                c.apply_flip(m.site, 0);
                return true;
            }
            return false;
        case StreamKind::Death1:
            if (c.state(m.site) == 1) {
                c.apply_flip(m.site, 0);
                return true;
            }
            return false;
        case StreamKind::Growth:
            if (c.state(m.site) == 1) {
                c.apply_flip(m.site, 2);
                return true;
            }
            return false;
        case StreamKind::GrowthExtra: {
            if (kind != ModelKind::StaverLevin || c.state(m.site) != 1) return false;
            const double span = p.omega.max() - p.omega.min();
            if (span <= 0.0) return false;
            // grass fraction read off the pre-mark configuration (left limit)
            const double f0 = c.local_fraction(m.site, 0, c.geometry().kradius);
            const double acc = (p.omega.at(f0) - p.omega.min()) / span;
            if (m.u <= acc) {
                c.apply_flip(m.site, 2);
                return true;
            }
            return false;
        }
        case StreamKind::Arrow: {
            if (m.target < 0) return false;
            if (kind == ModelKind::Truncated && !m.solid) return false;
            if (birth_thinning < 1.0 && m.u > birth_thinning) return false;
            if (c.state(m.site) == 2 && c.state(m.target) == 0) {
                c.apply_flip(m.target, 1);
                return true;
            }
            return false;
        }
    }
    return false;
}

}  // namespace

bool dominates(const Configuration& a, const Configuration& b) {
    if (a.geometry().nsites != b.geometry().nsites) return false;
    for (Site x = 0; x < a.geometry().nsites; ++x)
        if (a.state(x) < b.state(x)) return false;
    return true;
}

CoupledResult run_coupled(EventSchedule& sched, CoupledState& state, double sample_dt,
                          const MarkLogger& log) {
    const RateParams& p = sched.params();
    if (!dominates(state.chi, state.eta) || !dominates(state.eta, state.xi))
        throw std::invalid_argument("initial states must satisfy chi >= eta >= xi");

    CoupledResult out;
    auto snap = [&](double t) {
        out.samples.push_back({t,
                               {state.chi.total(0), state.chi.total(1), state.chi.total(2)},
                               {state.eta.total(0), state.eta.total(1), state.eta.total(2)},
                               {state.xi.total(0), state.xi.total(1), state.xi.total(2)}});
    };
    snap(0.0);
    double next_sample = sample_dt > 0.0 ? sample_dt : sched.horizon() + 1.0;

    auto check_site = [&](Site s) {
        if (s < 0) return;
        const int a = state.chi.state(s), b = state.eta.state(s), x = state.xi.state(s);
        if (a < b || b < x)
            throw CouplingViolation("domination chi >= eta >= xi broken at a site");
    };

    while (auto m = sched.next()) {
        while (next_sample <= m->time && next_sample <= sched.horizon()) {
            snap(next_sample);
            next_sample += sample_dt;
        }
        std::array<int, 3> pre{-1, -1, -1}, post{-1, -1, -1};
        const Site probe = m->stream == StreamKind::Arrow ? m->target : m->site;
        if (log && probe >= 0)
            pre = {state.chi.state(probe), state.eta.state(probe), state.xi.state(probe)};
        bool flipped = false;
        flipped |= apply_mark_one(state.chi, ModelKind::StaverLevin, *m, p, 1.0);
        flipped |= apply_mark_one(state.eta, ModelKind::Krone, *m, p, 1.0);
        flipped |= apply_mark_one(state.xi, ModelKind::Truncated, *m, p, 1.0);
        ++out.marks;
        if (flipped) ++out.flips;
        check_site(m->site);
        check_site(m->target);
        if (log && probe >= 0) {
            post = {state.chi.state(probe), state.eta.state(probe), state.xi.state(probe)};
            log(*m, pre, post);
        }
    }
    while (next_sample <= sched.horizon()) {
        snap(next_sample);
        next_sample += sample_dt;
    }
    snap(sched.horizon());
    return out;
}

RunResult run_on_schedule(ModelKind kind, EventSchedule& sched, Configuration& c,
                          double sample_dt, double birth_thinning) {
    if (!(birth_thinning > 0.0 && birth_thinning <= 1.0))
        throw std::invalid_argument("birth_thinning must lie in (0,1]");
    RunResult out;
    out.samples.push_back({0.0, {c.total(0), c.total(1), c.total(2)}});
    double next_sample = sample_dt > 0.0 ? sample_dt : sched.horizon() + 1.0;
    while (auto m = sched.next()) {
        while (next_sample <= m->time && next_sample <= sched.horizon()) {
            out.samples.push_back({next_sample, {c.total(0), c.total(1), c.total(2)}});
            next_sample += sample_dt;
        }
        ++out.proposals;
        if (apply_mark_one(c, kind, *m, sched.params(), birth_thinning)) ++out.flip_count;
    }
    out.final_time = sched.horizon();
    out.samples.push_back({out.final_time, {c.total(0), c.total(1), c.total(2)}});
    return out;
}

}  // namespace savanna
