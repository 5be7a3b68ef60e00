#include "savanna/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace savanna::diagnostics {

double RecoveryConstants::t_limit(int L) const { return t0 * std::log(static_cast<double>(L)); }

RecoveryConstants recovery_constants(const RateParams& p, int d, double a0_init, double alpha) {
    p.validate();
    const double w = p.omega.min();
    if (!(w > 0.0)) throw NoFeasibleConstants("growth rate must be positive");
    if (!(p.nu > 0.0)) throw NoFeasibleConstants("nu must be positive");
    const double lo = (p.mu + w) / w;
    const double hi = p.beta / p.nu;
    if (!(lo < hi))
        throw NoFeasibleConstants("survival condition fails: the theta interval is empty");

    RecoveryConstants rc;
    rc.d = d;
    rc.theta = 0.5 * (lo + hi);
    rc.alpha = alpha < 0.0 ? 0.75 * d : alpha;
    if (!(rc.alpha > 0.5 * d && rc.alpha < d))
        throw std::invalid_argument("alpha must lie in (d/2, d)");

    double a0 = a0_init;
    bool found = false;
    for (int it = 0; it < 40; ++it) {
        const double rho1 = rc.theta * w - (w + p.mu);
        const double rho2 = (p.beta * (1.0 - 4.0 * a0) - rc.theta * p.nu) / rc.theta;
        const double rho = std::min(rho1, rho2);
        if (rho > 0.0) {
            rc.rho = rho;
            found = true;
            break;
        }
        a0 *= 0.5;
    }
    if (!found) throw NoFeasibleConstants("no positive drift margin after 40 halvings");
    rc.a0 = a0;
    // (1 - 4 eps0)^d = 1 - a0, strictly above 1 - 2 a0
    rc.eps0 = (1.0 - std::pow(1.0 - a0, 1.0 / d)) / 4.0;
    rc.t0 = 2.0 * d / rc.rho;
    return rc;
}

double supnorm_exp_integral(int d) {
    double fact = 1.0;
    for (int i = 2; i <= d; ++i) fact *= i;
    return std::pow(2.0, d) * fact;
}

QResult q_functional(const Configuration& xi, double lambda, WeightSpec w, QPrefactor pre) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be > 0");
    const Geometry& g = xi.geometry();
    double sum = 0.0;
    for (Site x = 0; x < g.nsites; ++x) {
        const int s = xi.state(x);
        if (s == 0) continue;
        const double e = std::exp(-lambda * g.sup_norm_from_origin(x));
        sum += (s == 1 ? 1.0 : w.w2) * e;
    }
    QResult r;
    const double lam_d = std::pow(lambda, g.d);
    r.value = pre == QPrefactor::LambdaPowD ? lam_d * sum : sum;
    const double u = std::exp(lambda / 2.0) * supnorm_exp_integral(g.d);
    r.upper_bound = w.w2 * (pre == QPrefactor::LambdaPowD ? u : u / lam_d);
    r.within_bound = r.value <= r.upper_bound;
    return r;
}

namespace {

double mean_q_impl(const Configuration& xi, const RecoveryConstants& rc, const RateParams& p,
                   bool slow) {
    const Geometry& g = xi.geometry();
    const double w = p.omega.min();
    const double lambda = rc.lambda_for(g.L);
    const double coeff1 = (rc.theta - 1.0) * w - p.mu;
    const double denom = static_cast<double>(g.window_volume_L);
    double acc = 0.0;
    for (Site x = 0; x < g.nsites; ++x) {
        const double e = std::exp(-lambda * g.sup_norm_from_origin(x));
        switch (xi.state(x)) {
            case 1:
                acc += coeff1 * e;
                break;
            case 2:
                acc -= rc.theta * p.nu * e;
                break;
            default: {
                std::int64_t n2;
                if (slow) {
                    n2 = 0;
                    for (Site y : g.truncated_neighborhood(x)) n2 += xi.state(y) == 2;
                } else {
                    n2 = xi.n2_truncated(x);
                }
                if (n2 > 0) acc += p.beta * static_cast<double>(n2) / denom * e;
                break;
            }
        }
    }
    return std::pow(lambda, g.d) * acc;
}

}  // namespace

double infinitesimal_mean_q(const Configuration& xi, const RecoveryConstants& rc,
                            const RateParams& p) {
    return mean_q_impl(xi, rc, p, false);
}

double infinitesimal_mean_q_slow(const Configuration& xi, const RecoveryConstants& rc,
                                 const RateParams& p) {
    return mean_q_impl(xi, rc, p, true);
}

ExtinctionReport extinction_functionals(const Configuration& eta, const RateParams& p,
                                        double lambda_prime) {
    p.validate();
    const Geometry& g = eta.geometry();
    const double w = p.omega.max();
    if (!(p.nu > 0.0) || !(w > 0.0))
        throw std::invalid_argument("extinction functionals need nu > 0 and omega > 0");
    const double lo = p.beta / p.nu;
    const double hi = (p.mu + w) / w;
    if (!(lo <= hi))
        throw std::invalid_argument("extinction functionals need mu*nu >= omega*(beta - nu)");
    ExtinctionReport r;
    r.theta_prime = 0.5 * (lo + hi);
    r.coeff1 = (r.theta_prime - 1.0) * w - p.mu;
    r.coeff2 = p.beta * std::exp(lambda_prime * g.L) - r.theta_prime * p.nu;
    if (r.coeff2 > 0.0)
        throw LambdaTooLarge("beta * e^{lambda' L} exceeds theta' nu; shrink lambda'");

    const double denom = static_cast<double>(g.window_volume_L);
    for (Site x = 0; x < g.nsites; ++x) {
        const int s = eta.state(x);
        if (s == 0) continue;
        const double e = std::exp(-lambda_prime * g.sup_norm_from_origin(x));
        if (s == 1) {
            r.s_value += 1.0;
            r.mu_s += w * (r.theta_prime - 1.0) - p.mu;
            r.q_prime += e;
            r.mu_qprime_bound += r.coeff1 * e;
        } else {
            const double f0 =
                static_cast<double>(eta.count_in_window(x, 0, g.L)) / denom;
            r.s_value += r.theta_prime;
            r.mu_s += f0 * p.beta - r.theta_prime * p.nu;
            r.q_prime += r.theta_prime * e;
            r.mu_qprime_bound += r.coeff2 * e;
        }
    }
    return r;
}

Configuration sample_low_density(const Geometry& g, double max_fraction, int attempts,
                                 SplitMix64& rng, WindowSet ws) {
    Configuration c(g, ws);
    const auto cap = static_cast<int>(std::floor(max_fraction *
                                                 static_cast<double>(g.window_volume_L)));
    if (cap < 1) return c;  // nothing can be placed
    for (int a = 0; a < attempts; ++a) {
        const Site x = static_cast<Site>(rng.below(static_cast<std::uint64_t>(g.nsites)));
        if (c.state(x) != 0) continue;
        // placing at x must keep every window containing x under the cap
        int worst = 0;
        g.for_window(x, g.L, [&](Site v) {
            int cnt = 0;
            g.for_window(v, g.L, [&](Site y) { cnt += c.state(y) != 0; });
            worst = std::max(worst, cnt);
        });
        if (worst + 1 <= cap) c.apply_flip(x, rng.below(2) ? 2 : 1);
    }
    return c;
}

RecoveryEstimate estimate_recovery_time(const Geometry& g, const RateParams& p,
                                        const RecoveryConstants& rc, double alpha, int replicas,
                                        std::uint64_t seed) {
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    const int need = static_cast<int>(std::ceil(std::pow(static_cast<double>(g.L), alpha)));
    if (need > g.box_volume)
        throw std::invalid_argument("origin box too small for ceil(L^alpha) seeds; raise epsilon0");

    RecoveryEstimate est;
    est.t_limit = rc.t_limit(g.L);
    est.threshold = rc.a0 * static_cast<double>(g.box_volume);
    est.seeded_sites = need;
    const Site origin_box = g.box_of_site(0);
    const auto sites = g.box_sites(origin_box);
    int exceeded = 0;

    for (int rep = 0; rep < replicas; ++rep) {
        SplitMix64 rng(derive_seed(seed, 0x7ec0, rep));
        Configuration c(g, WindowSet::TreeOnly);
        // partial Fisher-Yates for a uniform subset
        std::vector<Site> pool = sites;
        for (int i = 0; i < need; ++i) {
            const auto j = i + static_cast<std::size_t>(
                                   rng.below(static_cast<std::uint64_t>(pool.size() - i)));
            std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
            c.apply_flip(pool[static_cast<std::size_t>(i)], rng.below(2) ? 2 : 1);
        }
        RunOptions opt;
        opt.box_crossing_frac = rc.a0;
        opt.stop_at_first_crossing = true;
        RunResult rr = run_model(ModelKind::Truncated, c, p, est.t_limit, derive_seed(seed, 1, rep),
                                 opt);
        if (rr.crossings.empty()) {
            ++exceeded;
            est.tau.push_back(est.t_limit);
        } else {
            est.tau.push_back(rr.crossings.front().t);
        }
    }
    est.exceed_fraction = static_cast<double>(exceeded) / replicas;
    const double se =
        std::sqrt(std::max(est.exceed_fraction * (1.0 - est.exceed_fraction), 1e-12) / replicas);
    est.ci_low = std::max(0.0, est.exceed_fraction - 1.96 * se);
    est.ci_high = std::min(1.0, est.exceed_fraction + 1.96 * se);
    return est;
}

BrwReport simulate_brw_max(const Geometry& g, const RateParams& p, double t, int replicas,
                           std::uint64_t seed, double m, std::int64_t particle_cap) {
    p.validate();
    BrwReport rep;
    rep.cosh_const = std::cosh(1.0) - 1.0;
    rep.threshold = 1.0 + (2.0 * p.beta + m) * t;
    rep.bound = 2.0 * std::exp(-m * t) * static_cast<double>(g.box_volume);
    const double thr_lattice = rep.threshold * g.L;

    std::array<double, 3> disp_sum{0, 0, 0}, disp_sq{0, 0, 0};
    std::array<long, 3> tail_hits{0, 0, 0};
    std::int64_t jumps = 0;

    const auto origin_sites = g.box_sites(g.box_of_site(0));
    for (int r = 0; r < replicas; ++r) {
        SplitMix64 rng(derive_seed(seed, 0xb2f, r));
        std::vector<std::array<std::int64_t, 3>> pos;
        pos.reserve(origin_sites.size() * 4);
        for (Site s : origin_sites) {
            const auto c = g.site_coords(s);
            pos.push_back({c[0], g.d > 1 ? c[1] : 0, g.d > 2 ? c[2] : 0});
        }
        std::array<std::int64_t, 3> maxabs{0, 0, 0};
        for (auto& q : pos)
            for (int k = 0; k < g.d; ++k) maxabs[k] = std::max(maxabs[k], std::abs(q[k]));

        double now = 0.0;
        while (true) {
            const double rate = p.beta * static_cast<double>(pos.size());
            now += rng.exponential(rate);
            if (now > t) break;
            if (static_cast<std::int64_t>(pos.size()) >= particle_cap)
                throw PopulationExplosion("branching walk exceeded the particle cap");
            const auto parent = pos[static_cast<std::size_t>(rng.below(pos.size()))];
            std::array<std::int64_t, 3> child = parent;
            for (int k = 0; k < g.d; ++k) {
                const auto off =
                    static_cast<std::int64_t>(rng.below(2 * g.L + 1)) - g.L;
                child[k] += off;
                const double resc = static_cast<double>(off) / g.L;
                disp_sum[k] += resc;
                disp_sq[k] += resc * resc;
                maxabs[k] = std::max(maxabs[k], std::abs(child[k]));
            }
            ++jumps;
            pos.push_back(child);
        }
        for (int k = 0; k < g.d; ++k)
            if (static_cast<double>(maxabs[k]) >= thr_lattice) ++tail_hits[k];
    }

    rep.jumps = jumps;
    for (int k = 0; k < g.d; ++k) {
        rep.empirical_tail =
            std::max(rep.empirical_tail, static_cast<double>(tail_hits[k]) / replicas);
        if (jumps > 1) {
            const double mean = disp_sum[k] / static_cast<double>(jumps);
            const double var =
                (disp_sq[k] - static_cast<double>(jumps) * mean * mean) /
                static_cast<double>(jumps - 1);
            rep.disp_mean[k] = mean;
            rep.disp_se[k] = std::sqrt(std::max(var, 0.0) / static_cast<double>(jumps));
        }
    }
    return rep;
}

MovingTrialResult moving_particle_trial(const Geometry& g, const RateParams& p,
                                        const std::array<int, 3>& v, int initial_nonzero,
                                        std::uint64_t seed, double delta) {
    if (initial_nonzero < 1 || initial_nonzero > g.box_volume)
        throw std::invalid_argument("initial_nonzero must fit in the origin box");
    const Site b0 = g.box_of_site(0);
    auto bc = g.box_coords(b0);
    for (int k = 0; k < g.d; ++k) {
        bc[k] += v[k];
        bc[k] %= g.boxes_per_dim;
        if (bc[k] < 0) bc[k] += g.boxes_per_dim;
    }
    const Site bv = g.box_index(bc);

    Configuration c(g, WindowSet::TreeOnly);
    SplitMix64 init_rng(derive_seed(seed, 0x601, 1));
    std::vector<Site> pool = g.box_sites(b0);
    for (int i = 0; i < initial_nonzero; ++i) {
        const auto j =
            i + static_cast<std::size_t>(init_rng.below(static_cast<std::uint64_t>(pool.size() - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        c.apply_flip(pool[static_cast<std::size_t>(i)], 1);
    }

    MovingTrialResult out;
    out.h00 = initial_nonzero;

    // first pass: read the marks only
    EventSchedule sched(g, p, 1.0, seed);
    std::vector<std::uint8_t> dead0(static_cast<std::size_t>(g.nsites), 0);
    std::vector<std::uint8_t> grew0(static_cast<std::size_t>(g.nsites), 0);
    std::vector<std::uint8_t> deadv(static_cast<std::size_t>(g.nsites), 0);
    std::vector<std::pair<Site, Site>> arrows;  // b0 -> bv in (1/2, 1)
    while (auto m = sched.next()) {
        const bool in0 = g.box_of_site(m->site) == b0;
        switch (m->stream) {
            case StreamKind::Death12:
            case StreamKind::Death1:
                if (in0) dead0[static_cast<std::size_t>(m->site)] = 1;
                if (g.box_of_site(m->site) == bv) deadv[static_cast<std::size_t>(m->site)] = 1;
                break;
            case StreamKind::Growth:
                if (in0 && m->time <= 0.5) grew0[static_cast<std::size_t>(m->site)] = 1;
                break;
            case StreamKind::Arrow:
                if (in0 && m->target >= 0 && g.box_of_site(m->target) == bv && m->time > 0.5)
                    arrows.emplace_back(m->site, m->target);
                break;
            default:
                break;
        }
    }
    std::vector<std::uint8_t> in_g0(static_cast<std::size_t>(g.nsites), 0);
    for (Site x : g.box_sites(b0)) {
        const auto i = static_cast<std::size_t>(x);
        if (c.state(x) >= 1 && !dead0[i] && grew0[i]) {
            in_g0[i] = 1;
            ++out.g0;
        }
    }
    std::vector<std::uint8_t> hit(static_cast<std::size_t>(g.nsites), 0);
    for (auto& [x, y] : arrows)
        if (in_g0[static_cast<std::size_t>(x)]) hit[static_cast<std::size_t>(y)] = 1;
    for (Site y : g.box_sites(bv)) {
        const auto i = static_cast<std::size_t>(y);
        if (!deadv[i] && hit[i]) ++out.s_count;
    }

    // second pass: replay the same marks through the constant-growth dynamics
    sched.reset();
    run_on_schedule(ModelKind::Krone, sched, c);
    for (Site y : g.box_sites(bv)) out.hv1 += c.state(y) != 0;
    out.success = out.hv1 >= delta * out.h00;
    return out;
}

std::optional<BoxCrossing> detect_wet_box(const std::vector<BoxCrossing>& crossings,
                                          const Geometry& g, Site center_box, int box_radius,
                                          double t_lo, double t_hi) {
    const auto cc = g.box_coords(center_box);
    for (const auto& cr : crossings) {
        if (cr.t < t_lo || cr.t > t_hi) continue;
        const auto bc = g.box_coords(cr.box);
        bool inside = true;
        for (int k = 0; k < g.d; ++k) {
            int dlt = std::abs(bc[k] - cc[k]);
            if (g.boundary == Boundary::Torus) dlt = std::min(dlt, g.boxes_per_dim - dlt);
            if (dlt > box_radius) {
                inside = false;
                break;
            }
        }
        if (inside) return cr;
    }
    return std::nullopt;
}

DynkinResult dynkin_residual(Configuration xi, const RateParams& p, const RecoveryConstants& rc,
                             double t, std::uint64_t seed) {
    DynkinResult out;
    const double lambda = rc.lambda_for(xi.geometry().L);
    out.q0 = q_functional(xi, lambda, {rc.theta}, QPrefactor::LambdaPowD).value;
    double t_last = 0.0;
    RunOptions opt;
    opt.before_flip = [&](double t_event) {
        out.integral_mu += infinitesimal_mean_q(xi, rc, p) * (t_event - t_last);
        t_last = t_event;
    };
    run_model(ModelKind::Truncated, xi, p, t, seed, opt);
    out.integral_mu += infinitesimal_mean_q(xi, rc, p) * (t - t_last);
    out.qt = q_functional(xi, lambda, {rc.theta}, QPrefactor::LambdaPowD).value;
    out.m_t = out.qt - out.q0 - out.integral_mu;
    return out;
}

}  // namespace savanna::diagnostics
