#pragma once

#include <vector>

namespace savanna::stats {

// Regularized upper incomplete gamma Q(a, x) = Gamma(a,x)/Gamma(a).
double gamma_q(double a, double x);

// P(X > x) for X chi-square with dof degrees of freedom.
double chi_square_sf(double x, int dof);

double binom_pmf(int k, int n, double p);

struct GofResult {
    double stat = 0.0;
    int dof = 0;
    double p_value = 1.0;
    int bins = 0;
    long n = 0;
};

// Pearson chi-square of an observed histogram over {0..n} against
// Binomial(n, p). Adjacent cells are pooled until every expected count
// reaches min_expected.
GofResult binomial_gof(const std::vector<long>& observed, int n, double p,
                       double min_expected = 5.0);

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    double se = 0.0;  // standard error of the mean
    long n = 0;
};

Moments moments(const std::vector<double>& xs);

}  // namespace savanna::stats
