#pragma once

#include <functional>

namespace availbound {

struct QuadResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    long evaluations = 0;
};

struct QuadOptions {
    double abs_tol = 1e-10;
    long max_intervals = 20000;
    long max_evaluations = 20000000;
};

// Adaptive Gauss-Kronrod (G7,K15) on a finite interval.
QuadResult integrate_finite(const std::function<double(double)>& f, double a, double b,
                            const QuadOptions& opt = {});

// Integral of f over [a, infinity) for nonnegative, eventually decreasing,
// integrable f. Uses the substitution s = a + u/(1-u) onto [0,1) followed by
// adaptive subdivision. Throws Error("NoConvergence") when the subdivision
// budget is exhausted before the error estimate meets abs_tol.
QuadResult integrate_semi_infinite(const std::function<double(double)>& f, double a,
                                   const QuadOptions& opt = {});

// sum_{i >= i_start} (2i+4)^alpha q^i (a + b*i), for q in [0,1), a,b >= 0.
// Truncation is certified: summation stops once the geometric domination
// bound on the remaining tail drops below rel_tol times the partial sum.
// Throws Error("RatioOutOfRange") for q outside [0,1) and
// Error("NoConvergence") if max_terms is reached first.
double sum_affine_power_series(double alpha, double q, double a, double b,
                               long i_start = 0, double rel_tol = 1e-8,
                               long max_terms = 100000000L);

// Generalized inverse inf{s : F(s) >= u} of a nondecreasing F, by bracketed
// bisection with bracket growth above hi. Honors flats and jumps: the
// returned point s satisfies F(s) >= u and is within s_tol of the infimum.
// Throws Error("BracketFailure") when no bracket can be established.
double invert_monotone(const std::function<double(double)>& F, double u,
                       double lo, double hi, double s_tol = 1e-12);

} // namespace availbound
