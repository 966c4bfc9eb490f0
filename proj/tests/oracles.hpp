#pragma once

// Test-only oracles, kept independent of the library's computation paths:
// the exponential integral behind the closed form of kappa, brute-force
// series sums, and reference constants for the canonical model
// (K1 = K2 = 4, Lambda = 5, pareto laws, alpha = 2, exact theta0, R = 1,
// N = 3) frozen from a long-double run of these same oracles.

#include <cmath>

namespace oracles {

// E1(x) by modified Lentz continued fraction (x > 1) / power series (x <= 1).
inline long double expint_e1(long double x) {
    if (x <= 1.0L) {
        const long double euler = 0.5772156649015328606065120900824024L;
        long double sum = 0.0L, term = 1.0L;
        for (int k = 1; k <= 200; ++k) {
            term *= -x / static_cast<long double>(k);
            const long double add = -term / static_cast<long double>(k);
            sum += add;
            if (fabsl(add) < 1e-24L * fabsl(sum)) break;
        }
        return -euler - logl(x) + sum;
    }
    const long double tiny = 1e-300L;
    long double b = x + 1.0L;
    long double c = 1.0L / tiny;
    long double d = 1.0L / b;
    long double h = d;
    for (int i = 1; i <= 20000; ++i) {
        const long double a = -static_cast<long double>(i) * static_cast<long double>(i);
        b += 2.0L;
        d = a * d + b;
        if (fabsl(d) < tiny) d = tiny;
        c = b + a / c;
        if (fabsl(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double del = d * c;
        h *= del;
        if (fabsl(del - 1.0L) < 1e-21L) break;
    }
    return expl(-x) * h;
}

// kappa(T) = K1 e^{Lambda(1+T)} E1(Lambda(1+T)).
inline long double kappa_closed_form(double k1, double lambda, double T) {
    const long double arg = static_cast<long double>(lambda) * (1.0L + static_cast<long double>(T));
    return static_cast<long double>(k1) * expl(arg) * expint_e1(arg);
}

// Plain partial sum of sum_{i>=i0} (2i+4)^alpha q^i (a + b i).
inline long double brute_series(double alpha, double q, double a, double b, long i0,
                                long terms) {
    long double sum = 0.0L;
    long double qi = powl(static_cast<long double>(q), static_cast<long double>(i0));
    for (long i = i0; i < i0 + terms; ++i) {
        sum += powl(2.0L * i + 4.0L, static_cast<long double>(alpha)) * qi *
               (static_cast<long double>(a) + static_cast<long double>(b) * i);
        qi *= static_cast<long double>(q);
    }
    return sum;
}

// M_j(k) for the pareto envelope: Gamma(k+1) Gamma(K-k) / Gamma(K).
inline double big_m_gamma(double k, double K) {
    return std::tgamma(k + 1.0) * std::tgamma(K - k) / std::tgamma(K);
}

// Frozen long-double reference values for the canonical model.
namespace canonical {
inline constexpr double e1_5 = 1.14829559127532580e-03;
inline constexpr double kappa0 = 0.681688705138928807;      // kappa(0) = 4 e^5 E1(5)
inline constexpr double kappa3 = 0.190874181983843367;      // kappa(3) = 4 e^20 E1(20)
inline constexpr double theta0_exact = 2.0 / 3.0;
inline constexpr double theta0_bracket = 25.0 / 18.0;
inline constexpr double pi_13 = 9.43898999695155699e-04;    // pi(R=1, N=3)
inline constexpr double p_13 = 1.80165949442180863e-04;     // pi * kappa(3)
inline constexpr double series_factor = 1.36807835179439008e12;
inline constexpr double psi_w0 = 1.51939375366729207e16;    // Psi(2, (1,0))
inline constexpr double psi_w5 = 1.52258593648814564e16;    // Psi(2, (1,5))
inline constexpr double psi_tight_w0 = 4.56488386870005068e11;
inline constexpr double c15_w0_r0 = 4.56211020666529357e11; // pair ((1,0),(2,0))
} // namespace canonical

} // namespace oracles
