#include "availbound/numerics.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <string>

#include "availbound/errors.hpp"

namespace availbound {

namespace {

// Gauss-Kronrod 7-15 pair. Kronrod nodes/weights on [-1,1]; the embedded
// Gauss rule reuses every other node.
constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct GkEstimate {
    double kronrod;
    double error;
};

GkEstimate gk15(const std::function<double(double)>& f, double a, double b, long& evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    evals += 15;
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double x = h * kXgk[j];
        const double f1 = f(c - x);
        const double f2 = f(c + x);
        resk += kWgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
    }
    const double kron = resk * h;
    const double gauss = resg * h;
    if (!std::isfinite(kron))
        fail("NoConvergence", "integrand produced a non-finite value");
    return {kron, std::fabs(kron - gauss)};
}

struct Interval {
    double a, b, value, error;
    long order; // insertion order, breaks heap ties deterministically
};

struct WorseError {
    bool operator()(const Interval& x, const Interval& y) const {
        if (x.error != y.error) return x.error < y.error;
        return x.order > y.order;
    }
};

} // namespace

// Globally adaptive: always bisect the interval with the largest error
// estimate, so endpoint singularities only cost a logarithmic number of
// subdivisions.
QuadResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                            const QuadOptions& opt) {
    QuadResult r;
    if (a == b) return r;
    long evals = 0;
    long order = 0;
    std::priority_queue<Interval, std::vector<Interval>, WorseError> heap;
    {
        const GkEstimate e = gk15(f, a, b, evals);
        heap.push({a, b, e.kronrod, e.error, order++});
    }
    double total_error = heap.top().error;
    while (total_error > opt.abs_tol) {
        if (evals > opt.max_evaluations)
            fail("NoConvergence", "evaluation budget exhausted");
        if (order >= opt.max_intervals)
            fail("NoConvergence", "subdivision cap reached with error " +
                                      std::to_string(total_error));
        const Interval worst = heap.top();
        heap.pop();
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b)
            fail("NoConvergence", "interval collapsed below machine precision");
        const GkEstimate left = gk15(f, worst.a, m, evals);
        const GkEstimate right = gk15(f, m, worst.b, evals);
        total_error += left.error + right.error - worst.error;
        heap.push({worst.a, m, left.kronrod, left.error, order++});
        heap.push({m, worst.b, right.kronrod, right.error, order++});
    }
    long double value = 0.0L;
    while (!heap.empty()) {
        value += heap.top().value;
        heap.pop();
    }
    r.value = static_cast<double>(value);
    r.abs_error_estimate = total_error;
    r.evaluations = evals;
    return r;
}

QuadResult integrate_semi_infinite(const std::function<double(double)>& f, double a,
                                   const QuadOptions& opt) {
    auto g = [&f, a](double u) {
        const double om = 1.0 - u;
        const double s = a + u / om;
        const double v = f(s);
        return v / (om * om);
    };
    return integrate_finite(g, 0.0, 1.0, opt);
}

double sum_affine_power_series(double alpha, double q, double a, double b,
                               long i_start, double rel_tol, long max_terms) {
    if (!(q >= 0.0) || q >= 1.0)
        fail("RatioOutOfRange", "q must lie in [0,1), got " + std::to_string(q));
    if (a < 0.0 || b < 0.0)
        fail("RatioOutOfRange", "affine coefficients must be nonnegative");
    if (a == 0.0 && b == 0.0) return 0.0;

    long double sum = 0.0L;
    long double qi = std::pow((long double)q, (long double)i_start);
    for (long i = i_start; i - i_start < max_terms; ++i) {
        const long double base = 2.0L * (long double)i + 4.0L;
        const long double affine = (long double)a + (long double)b * (long double)i;
        const long double term = powl(base, (long double)alpha) * qi * affine;
        sum += term;
        qi *= (long double)q;
        if (affine > 0.0L && term >= 0.0L) {
            // term_{k+1}/term_k <= q * ((2i+6)/(2i+4))^max(alpha,0) * (a+b(i+1))/(a+bi)
            // for every k >= i; both ratio factors are nonincreasing in i.
            long double growth = (long double)a + (long double)b * (long double)(i + 1);
            long double ratio = (long double)q * (growth / affine);
            if (alpha > 0.0) ratio *= powl((base + 2.0L) / base, (long double)alpha);
            if (ratio < 1.0L) {
                const long double tail_bound = term * ratio / (1.0L - ratio);
                if (tail_bound <= (long double)rel_tol * sum)
                    return static_cast<double>(sum);
            }
        }
    }
    fail("NoConvergence", "series did not meet tolerance within " +
                              std::to_string(max_terms) + " terms");
}

double invert_monotone(const std::function<double(double)>& F, double u,
                       double lo, double hi, double s_tol) {
    if (!(hi >= lo)) fail("BracketFailure", "empty bracket");
    if (F(lo) >= u) return lo;
    double a = lo, b = hi;
    double span = (hi > lo) ? (hi - lo) : 1.0;
    int grow = 0;
    while (F(b) < u) {
        a = b;
        b += span;
        span *= 2.0;
        if (++grow > 200 || !std::isfinite(b))
            fail("BracketFailure", "monotone inversion found no upper bracket");
    }
    // Invariant: F(a) < u <= F(b); converges to inf{s : F(s) >= u}.
    for (int it = 0; it < 4000 && (b - a) > s_tol; ++it) {
        const double m = a + 0.5 * (b - a);
        if (m <= a || m >= b) break;
        if (F(m) >= u)
            b = m;
        else
            a = m;
    }
    return b;
}

} // namespace availbound
