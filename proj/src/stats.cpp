#include "savanna/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace savanna::stats {

namespace {

// Lower regularized gamma by series, for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma by Lentz continued fraction, for x >= a + 1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q needs a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_sf(double x, int dof) { return gamma_q(0.5 * dof, 0.5 * x); }

double binom_pmf(int k, int n, double p) {
    if (k < 0 || k > n) return 0.0;
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const double lg = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                      k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(lg);
}

GofResult binomial_gof(const std::vector<long>& observed, int n, double p, double min_expected) {
    if (static_cast<int>(observed.size()) != n + 1)
        throw std::invalid_argument("observed histogram must cover 0..n");
    long total = 0;
    for (long o : observed) total += o;
    if (total == 0) throw std::invalid_argument("empty sample");

    // pool adjacent cells until each expected count clears the floor
    std::vector<double> exp_bins;
    std::vector<long> obs_bins;
    double e_acc = 0.0;
    long o_acc = 0;
    for (int k = 0; k <= n; ++k) {
        e_acc += total * binom_pmf(k, n, p);
        o_acc += observed[static_cast<std::size_t>(k)];
        if (e_acc >= min_expected) {
            exp_bins.push_back(e_acc);
            obs_bins.push_back(o_acc);
            e_acc = 0.0;
            o_acc = 0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0) {
        if (exp_bins.empty()) {
            exp_bins.push_back(e_acc);
            obs_bins.push_back(o_acc);
        } else {
            exp_bins.back() += e_acc;
            obs_bins.back() += o_acc;
        }
    }

    GofResult r;
    r.bins = static_cast<int>(exp_bins.size());
    r.n = total;
    if (r.bins < 2) {
        // all mass in one bin: nothing to test
        r.dof = 0;
        r.p_value = 1.0;
        return r;
    }
    for (std::size_t i = 0; i < exp_bins.size(); ++i) {
        const double diff = obs_bins[i] - exp_bins[i];
        r.stat += diff * diff / exp_bins[i];
    }
    r.dof = r.bins - 1;
    r.p_value = chi_square_sf(r.stat, r.dof);
    return r;
}

Moments moments(const std::vector<double>& xs) {
    Moments m;
    m.n = static_cast<long>(xs.size());
    if (m.n == 0) return m;
    double s = 0.0;
    for (double x : xs) s += x;
    m.mean = s / m.n;
    double v = 0.0;
    for (double x : xs) v += (x - m.mean) * (x - m.mean);
    m.sd = m.n > 1 ? std::sqrt(v / (m.n - 1)) : 0.0;
    m.se = m.n > 0 ? m.sd / std::sqrt(static_cast<double>(m.n)) : 0.0;
    return m;
}

}  // namespace savanna::stats
