#pragma once

#include <functional>
#include <vector>

namespace availbound {

// Inverse standard normal CDF (Wichura's AS 241 PPND16), p in (0,1).
double normal_quantile(double p);

struct WilsonInterval {
    double center = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    double half_width = 0.0;
};

// Wilson score interval for a binomial proportion at two-sided `level`
// (e.g. 0.99). Stays valid near 0 and 1 where the normal interval breaks.
WilsonInterval wilson_interval(long successes, long n, double level);

struct KsResult {
    double statistic = 0.0;
    double p_value = 0.0;
    double n_effective = 0.0;
};

// One-sample Kolmogorov-Smirnov against a continuous CDF. Samples are copied
// and sorted internally.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

// Two-sample Kolmogorov-Smirnov.
KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b);

// Asymptotic Kolmogorov tail probability for statistic d at effective sample
// size n (Stephens' correction).
double ks_p_value(double d, double n_effective);

double mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

} // namespace availbound
