#include "savanna/ide.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "savanna/errors.hpp"
#include "savanna/meanfield.hpp"

namespace savanna::ide {

Field::Field(int d, GridSpec spec) : d_(d), h_(spec.h), kappa_(spec.kappa) {
    if (d < 1 || d > 3) throw std::invalid_argument("d must be 1, 2 or 3");
    if (!(spec.h > 0.0) || !(spec.half_width > 0.0) || !(spec.kappa > 0.0))
        throw std::invalid_argument("grid spacing, extent and kappa must be positive");
    m_ = static_cast<int>(std::lround(spec.half_width / spec.h));
    if (m_ < 1) throw std::invalid_argument("grid too small");
    std::size_t sz = 1;
    for (int k = 0; k < d_; ++k) sz *= static_cast<std::size_t>(n());
    s.assign(sz, 0.0);
    t.assign(sz, 0.0);
}

std::array<int, 3> Field::coords_of(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    for (int k = d_ - 1; k >= 0; --k) {
        c[k] = static_cast<int>(idx % static_cast<std::size_t>(n()));
        idx /= static_cast<std::size_t>(n());
    }
    return c;
}

double Field::sup_coord(std::size_t idx) const {
    const auto c = coords_of(idx);
    double r = 0.0;
    for (int k = 0; k < d_; ++k) r = std::max(r, std::fabs(coord(c[k])));
    return r;
}

SummedAreaTable::SummedAreaTable(const std::vector<double>& v, int d, int n) : d_(d), n_(n) {
    const int n1 = n + 1;
    std::size_t sz = 1;
    for (int k = 0; k < d; ++k) sz *= static_cast<std::size_t>(n1);
    p_.assign(sz, 0.0L);
    auto pidx = [&](int i, int j, int k) {
        std::size_t idx = static_cast<std::size_t>(i);
        if (d_ >= 2) idx = idx * n1 + j;
        if (d_ >= 3) idx = idx * n1 + k;
        return idx;
    };
    auto vidx = [&](int i, int j, int k) {
        std::size_t idx = static_cast<std::size_t>(i);
        if (d_ >= 2) idx = idx * static_cast<std::size_t>(n) + j;
        if (d_ >= 3) idx = idx * static_cast<std::size_t>(n) + k;
        return idx;
    };
    const int nj = d_ >= 2 ? n : 1;
    const int nk = d_ >= 3 ? n : 1;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < nj; ++j)
            for (int k = 0; k < nk; ++k) {
                long double acc = v[vidx(i, j, k)] + p_[pidx(i, j + 1, k + 1)];
                if (d_ >= 2) acc += p_[pidx(i + 1, j, k + 1)] - p_[pidx(i, j, k + 1)];
                if (d_ >= 3)
                    acc += p_[pidx(i + 1, j + 1, k)] - p_[pidx(i, j + 1, k)] -
                           p_[pidx(i + 1, j, k)] + p_[pidx(i, j, k)];
                p_[pidx(i + 1, j + 1, k + 1)] = acc;
            }
}

long double SummedAreaTable::at(int i, int j, int k) const {
    const int n1 = n_ + 1;
    std::size_t idx = static_cast<std::size_t>(i);
    if (d_ >= 2) idx = idx * n1 + j;
    if (d_ >= 3) idx = idx * n1 + k;
    return p_[idx];
}

double SummedAreaTable::window_mean(const std::array<int, 3>& center, int r) const {
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int k = 0; k < d_; ++k) {
        lo[k] = std::max(center[k] - r, 0);
        hi[k] = std::min(center[k] + r, n_ - 1);
        if (lo[k] > hi[k]) return 0.0;  // window entirely outside: all grass
    }
    long double sum;
    if (d_ == 1) {
        sum = at(hi[0] + 1, 0, 0) - at(lo[0], 0, 0);
    } else if (d_ == 2) {
        sum = at(hi[0] + 1, hi[1] + 1, 0) - at(lo[0], hi[1] + 1, 0) - at(hi[0] + 1, lo[1], 0) +
              at(lo[0], lo[1], 0);
    } else {
        sum = at(hi[0] + 1, hi[1] + 1, hi[2] + 1) - at(lo[0], hi[1] + 1, hi[2] + 1) -
              at(hi[0] + 1, lo[1], hi[2] + 1) - at(hi[0] + 1, hi[1] + 1, lo[2]) +
              at(lo[0], lo[1], hi[2] + 1) + at(lo[0], hi[1] + 1, lo[2]) +
              at(hi[0] + 1, lo[1], lo[2]) - at(lo[0], lo[1], lo[2]);
    }
    long double volume = 1.0L;
    for (int k = 0; k < d_; ++k) volume *= 2 * r + 1;
    return static_cast<double>(sum / volume);
}

double window_mean_direct(const std::vector<double>& v, int d, int n,
                          const std::array<int, 3>& center, int r) {
    auto vidx = [&](int i, int j, int k) {
        std::size_t idx = static_cast<std::size_t>(i);
        if (d >= 2) idx = idx * static_cast<std::size_t>(n) + j;
        if (d >= 3) idx = idx * static_cast<std::size_t>(n) + k;
        return idx;
    };
    double sum = 0.0;
    for (int i = std::max(center[0] - r, 0); i <= std::min(center[0] + r, n - 1); ++i) {
        if (d == 1) {
            sum += v[vidx(i, 0, 0)];
            continue;
        }
        for (int j = std::max(center[1] - r, 0); j <= std::min(center[1] + r, n - 1); ++j) {
            if (d == 2) {
                sum += v[vidx(i, j, 0)];
                continue;
            }
            for (int k = std::max(center[2] - r, 0); k <= std::min(center[2] + r, n - 1); ++k)
                sum += v[vidx(i, j, k)];
        }
    }
    double volume = 1.0;
    for (int k = 0; k < d; ++k) volume *= 2 * r + 1;
    return sum / volume;
}

FrontConstants front_constants(const RateParams& p, double kappa, int d) {
    p.validate();
    if (p.omega.kind != GrowthKind::Step)
        throw std::invalid_argument("front constants need a step growth rate");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
    if (d < 1 || d > 3) throw std::invalid_argument("d must be 1, 2 or 3");
    const double w0 = p.omega.omega0;
    const double pow2d = std::pow(2.0, d);

    FrontConstants c;
    c.d = d;
    c.kappa = kappa;
    c.delta0 = p.omega.delta0;
    if (!(p.beta * w0 > pow2d * p.nu * (p.mu + w0)))
        throw HypothesisFails("beta*omega0 <= 2^d nu (mu + omega0)");

    const double sigma_sup = 1.0 - pow2d * p.nu * (p.mu + w0) / (p.beta * w0);
    c.sigma0 = 0.5 * sigma_sup;
    const double g_lo = p.nu / w0;
    const double g_hi = p.beta * (1.0 - c.sigma0) / (pow2d * (p.mu + w0));
    c.gamma0 = 0.5 * (g_lo + g_hi);
    c.t0 = c.sigma0 / (1.0 + c.gamma0);
    c.s0 = c.gamma0 * c.sigma0 / (1.0 + c.gamma0);
    if (!(c.delta0 < c.s0 / pow2d)) throw HypothesisFails("delta0 must be below 2^-d S0");
    c.m_radius = std::max(4.0, 4.0 * kappa);

    c.eps_t1 = kappa * (1.0 - pow2d * c.delta0 / c.s0) / (4.0 * d);
    c.eps_t2 = (1.0 - pow2d * (p.mu + w0) * c.gamma0 / (p.beta * (1.0 - c.sigma0))) / (6.0 * d);
    c.eps_profile = std::min(c.eps_t1, c.eps_t2);
    const double margin_t = w0 * c.t0 * (c.gamma0 - p.nu / w0);
    const double margin_s =
        c.t0 * (p.mu + w0) *
        ((1.0 - 3.0 * d * c.eps_t2) * p.beta * (1.0 - c.sigma0) / (pow2d * (p.mu + w0)) -
         c.gamma0);
    c.eps_rate = 0.25 * std::min(margin_t, margin_s);

    // block-scale ledger, reported for reproducibility
    c.eps_pim1 = (c.s0 / pow2d - c.delta0) / (8.0 * d);
    c.eps_pim2 = (c.s0 * (1.0 - d * c.eps_profile) - pow2d * c.delta0) /
                 (20.0 * d * c.s0 + std::pow(2.0, d + 2) * d);
    c.eps_pim3 =
        std::pow(2.0, d - 1) * c.eps_rate / (5.0 * d * c.t0 * (1.0 - c.sigma0) * p.beta);
    c.eps_pim = std::min({c.eps_pim1, c.eps_pim2, c.eps_pim3});
    c.delta_pur1 = (c.s0 / pow2d * (1.0 - d * c.eps_profile - 10.0 * d * c.eps_pim) - c.delta0 -
                    4.0 * d * c.eps_pim) /
                   4.0;
    c.delta_pur = std::min({c.delta_pur1, c.eps_rate / (2.0 * (w0 + p.nu)),
                            c.eps_rate / (2.0 * (2.0 + 3.0 * p.beta + w0 + p.mu))});
    c.c_lip = std::max(c.s0, c.t0) / c.eps_profile;
    c.eps_box = std::min(c.delta_pur * c.eps_rate / (16.0 * (p.beta + w0 + p.mu) * c.c_lip),
                         c.eps_pim / 2.0);
    c.t_hold = c.delta_pur / (2.0 * (p.beta + w0 + p.mu));
    c.c_gain = c.delta_pur * c.eps_rate / (8.0 * (p.beta + w0 + p.mu));

    for (double v : {c.eps_t1, c.eps_t2, c.eps_profile, c.eps_rate, c.eps_pim1, c.eps_pim2,
                     c.eps_pim3, c.delta_pur1, c.delta_pur, c.eps_box, c.t_hold, c.c_gain})
        if (!(v > 0.0)) throw HypothesisFails("a derived constant came out nonpositive");
    return c;
}

Field build_seed_profiles(const FrontConstants& c, GridSpec spec) {
    if (spec.half_width < c.m_radius + c.kappa + 1.0)
        throw std::invalid_argument("grid must cover the profile plus one kernel width");
    if (spec.h > c.eps_profile / 4.0)
        throw GridTooCoarse("grid spacing cannot resolve the ramp; need h <= eps_profile/4");
    spec.kappa = c.kappa;
    Field f(c.d, spec);
    const double eps = c.eps_profile;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = f.sup_coord(i);
        f.s[i] = c.s0 * std::clamp((c.m_radius - r) / eps, 0.0, 1.0);
        f.t[i] = c.t0 * std::clamp((c.m_radius - 2.0 * eps - r) / eps, 0.0, 1.0);
    }
    return f;
}

namespace {

int kernel_radius(const Field& f, double half_width) {
    const int r = static_cast<int>(std::lround(half_width / f.h()));
    if (r < 1) throw std::invalid_argument("kernel narrower than one node");
    return r;
}

}  // namespace

void derivatives(const Field& f, const RateParams& p, std::vector<double>& ds,
                 std::vector<double>& dt_out) {
    const int r1 = kernel_radius(f, 1.0);
    const int rk = kernel_radius(f, f.kappa());
    ds.assign(f.size(), 0.0);
    dt_out.assign(f.size(), 0.0);
    SummedAreaTable sat_s(f.s, f.d(), f.n());
    SummedAreaTable sat_t(f.t, f.d(), f.n());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const auto c = f.coords_of(i);
        const double dtree = sat_t.window_mean(c, r1);
        const double dgrass = 1.0 - sat_s.window_mean(c, rk) - sat_t.window_mean(c, rk);
        meanfield::gst_rhs(f.s[i], f.t[i], dtree, p.omega.at(dgrass), p.beta, p.mu, p.nu, ds[i],
                           dt_out[i]);
    }
}

Field step(const Field& f, const RateParams& p, double dt) {
    p.validate();
    const double rate_sum = p.beta + p.mu + p.nu + p.omega.max();
    if (!(dt > 0.0) || dt > 0.1 / rate_sum)
        throw std::invalid_argument("dt must lie in (0, 0.1/(beta+mu+nu+omega_max)]");
    std::vector<double> ds, dte;
    derivatives(f, p, ds, dte);
    Field out = f;
    for (std::size_t i = 0; i < f.size(); ++i) {
        out.s[i] = f.s[i] + dt * ds[i];
        out.t[i] = f.t[i] + dt * dte[i];
        const double slack = 1e-9;
        if (out.s[i] < -slack || out.t[i] < -slack || out.s[i] + out.t[i] > 1.0 + slack)
            throw InvariantBreach("a node left the density simplex");
    }
    return out;
}

GrowthCheck verify_seed_growth(const Field& f, const FrontConstants& c, const RateParams& p) {
    GrowthCheck g;
    g.required = 4.0 * c.eps_rate;
    // capped so the tolerance can never swallow the whole margin; the raw
    // 10 h (sum of rates) figure is far above the actual O(h) kernel error
    g.tol = std::min(10.0 * f.h() * (p.beta + p.mu + p.nu + p.omega.max()), 2.0 * c.eps_rate);
    std::vector<double> ds, dte;
    derivatives(f, p, ds, dte);

    const int rk = kernel_radius(f, f.kappa());
    SummedAreaTable sat_s(f.s, f.d(), f.n());
    SummedAreaTable sat_t(f.t, f.d(), f.n());

    const double pad = 1e-9;
    double min_s = std::numeric_limits<double>::infinity();
    double min_t = std::numeric_limits<double>::infinity();
    g.omega_locked = true;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = f.sup_coord(i);
        if (r <= c.m_radius + pad) {
            min_s = std::min(min_s, ds[i]);
            const auto cc = f.coords_of(i);
            const double dgrass =
                1.0 - sat_s.window_mean(cc, rk) - sat_t.window_mean(cc, rk);
            if (p.omega.at(dgrass) != p.omega.omega0) g.omega_locked = false;
        }
        if (r <= c.m_radius - 2.0 * c.eps_profile + pad) min_t = std::min(min_t, dte[i]);
    }
    g.min_deriv_s = min_s;
    g.min_deriv_t = min_t;
    g.pass_s = min_s >= g.required - g.tol;
    g.pass_t = min_t >= g.required - g.tol;
    g.pass = g.pass_s && g.pass_t && g.omega_locked;
    return g;
}

double level_radius(const Field& f, double level) {
    double r = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.t[i] > level) r = std::max(r, f.sup_coord(i));
    return r;
}

FrontTrack run_front(Field& f, const RateParams& p, double dt, double t_end, double sample_every,
                     double level) {
    FrontTrack track;
    double t = 0.0;
    double next_sample = 0.0;
    while (true) {
        if (t >= next_sample - 1e-12) {
            track.times.push_back(t);
            track.radii.push_back(level_radius(f, level));
            next_sample += sample_every;
        }
        if (t >= t_end) break;
        f = step(f, p, std::min(dt, t_end - t));
        t += std::min(dt, t_end - t);
    }
    // least-squares slope over the trailing half of the samples
    const std::size_t n = track.times.size();
    const std::size_t start = n / 2;
    if (n - start >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const auto cnt = static_cast<double>(n - start);
        for (std::size_t i = start; i < n; ++i) {
            sx += track.times[i];
            sy += track.radii[i];
            sxx += track.times[i] * track.times[i];
            sxy += track.times[i] * track.radii[i];
        }
        const double denom = cnt * sxx - sx * sx;
        if (denom > 0) track.slope = (cnt * sxy - sx * sy) / denom;
    }
    return track;
}

void save_field(const Field& f, std::ostream& os) {
    os << "savanna-field 1 " << f.d() << ' ' << f.h() << ' ' << f.m() * f.h() << ' '
       << f.kappa() << '\n';
    os.write(reinterpret_cast<const char*>(f.s.data()),
             static_cast<std::streamsize>(f.s.size() * sizeof(double)));
    os.write(reinterpret_cast<const char*>(f.t.data()),
             static_cast<std::streamsize>(f.t.size() * sizeof(double)));
    if (!os) throw IoError("field write failed");
}

Field load_field(std::istream& is) {
    std::string tag;
    int version = 0, d = 0;
    GridSpec spec;
    is >> tag >> version >> d >> spec.h >> spec.half_width >> spec.kappa;
    if (!is || tag != "savanna-field" || version != 1) throw IoError("bad field header");
    is.ignore(1);
    Field f(d, spec);
    is.read(reinterpret_cast<char*>(f.s.data()),
            static_cast<std::streamsize>(f.s.size() * sizeof(double)));
    is.read(reinterpret_cast<char*>(f.t.data()),
            static_cast<std::streamsize>(f.t.size() * sizeof(double)));
    if (!is) throw IoError("truncated field payload");
    return f;
}

void write_csv_slice(const Field& f, std::ostream& os) {
    os << "x,S,T\n";
    std::array<int, 3> c{f.m(), f.m(), f.m()};
    for (int i = 0; i < f.n(); ++i) {
        c[0] = i;
        const auto idx = f.node(c);
        os << f.coord(i) << ',' << f.s[idx] << ',' << f.t[idx] << '\n';
    }
}

}  // namespace savanna::ide
