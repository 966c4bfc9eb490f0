#include "availbound/stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "availbound/errors.hpp"

namespace availbound {

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        fail("RangeError", "normal_quantile needs p in (0,1), got " + std::to_string(p));
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
              4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
              2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
              5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -x : x;
}

WilsonInterval wilson_interval(long successes, long n, double level) {
    if (n <= 0) fail("RangeError", "wilson_interval needs n > 0");
    if (!(level > 0.0 && level < 1.0))
        fail("RangeError", "confidence level must lie in (0,1)");
    const double z = normal_quantile(0.5 * (1.0 + level));
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    WilsonInterval w;
    w.center = (phat + z2 / (2.0 * nn)) / denom;
    w.half_width = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn)) / denom;
    w.lo = std::max(0.0, w.center - w.half_width);
    w.hi = std::min(1.0, w.center + w.half_width);
    return w;
}

double ks_p_value(double d, double n_effective) {
    const double sn = std::sqrt(n_effective);
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * lambda * lambda * k * k);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) fail("RangeError", "ks_test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double fx = cdf(samples[i]);
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - fx);
        d = std::max(d, fx - static_cast<double>(i) / n);
    }
    return {d, ks_p_value(d, n), n};
}

KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) fail("RangeError", "ks_test_two_sample needs samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    return {d, ks_p_value(d, ne), ne};
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) fail("RangeError", "mean of empty sample");
    long double s = 0.0L;
    for (double x : xs) s += x;
    return static_cast<double>(s / xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) fail("RangeError", "variance needs at least two samples");
    const double m = mean(xs);
    long double s = 0.0L;
    for (double x : xs) s += (x - m) * (long double)(x - m);
    return static_cast<double>(s / (xs.size() - 1));
}

} // namespace availbound
