#pragma once

#include <json.hpp>

#include "availbound/model.hpp"

namespace availbound {

// Window parameters of the coupling scheme: regeneration window R and the
// multiplier N bounding the reference working period inside (R, NR).
struct BoundParams {
    double alpha = 0.0;
    double R = 0.0;
    double N = 0.0;
};

enum class Theta0Mode { Bracket, Exact };

struct BoundTolerances {
    double quad_abs = 1e-10;
    double series_rel = 1e-8;
};

struct MomentBounds {
    double mu_a = 0.0; // lower bound on E xi^a
    double m1_a = 0.0; // upper bound on E xi^a
    double m2_b = 0.0; // upper bound on E eta^b
};

MomentBounds moment_bounds(const Model& m, double a, double b);

// M_j(k) = k * int_0^inf s^{k-1} (1+s)^{-K_j} ds (tail-envelope moment).
double big_m(const Model& m, Regime j, double k, const BoundTolerances& tol = {});

// Conditional variant M_j^(x)(k) = k/(1-F_j(x)) * int_0^inf s^{k-1}(1+s+x)^{-K_j} ds.
double big_m_x(const Model& m, Regime j, double x, double k, const BoundTolerances& tol = {});

// kappa(T) = int_0^inf K1 e^{-Lambda s} / (1+T+s) ds.
double kappa(const Model& m, double T, const BoundTolerances& tol = {});

// Computable upper bound (m1(2)+2m1(1)m2(1)+m2(2)) / (2 mu_1) on the mean
// residual cycle length.
double theta0_bracket(const Model& m);
// E(xi+eta)^2 / (2(E xi + E eta)) from the model's actual moments.
double theta0_exact(const Model& m);
double theta0_value(const Model& m, Theta0Mode mode);

struct CouplingBound {
    double theta0 = 0.0;
    double kappa_NR = 0.0;
    double pi_RN = 0.0; // (1 - theta0/R)(e^{-Lambda R} - (1+NR)^{-K1})
    double p = 0.0;     // pi_RN * kappa(NR)
    double q = 0.0;     // 1 - p
};

// Validates the window (R > theta0, e^{-Lambda R} > (1+NR)^{-K1}) and
// evaluates the per-cycle coupling success bound. Throws
// Error("InvalidWindow") on an inadmissible window.
CouplingBound coupling_q(const Model& m, const BoundParams& bp, Theta0Mode mode,
                         const BoundTolerances& tol = {});

struct BoundReport {
    double alpha = 0.0;
    SystemState x0;
    double R = 0.0, N = 0.0;
    Theta0Mode theta0_mode = Theta0Mode::Bracket;
    double theta0 = 0.0, kappa_NR = 0.0, pi_RN = 0.0, p = 0.0, q = 0.0;
    double m1_alpha = 0.0, m2_alpha = 0.0;
    double m_x0_alpha = 0.0;  // conditional moment at the initial state
    double initial_term = 0.0;
    double availability = 0.0, mean_work = 0.0, mean_repair = 0.0;
    double stationary_work_term = 0.0, stationary_repair_term = 0.0;
    double bracket_b = 0.0;      // i-independent part of the series bracket
    double series_factor = 0.0;  // sum (2i+4)^alpha q^i
    double psi = 0.0;
    // Same assembly under the derivation-chain indexing
    // sum_{i>=1} q^{i-1} (2i+4)^{alpha-1} (...): tighter, reported alongside.
    double psi_derivation_tight = 0.0;

    double bound_at(double t) const;
    nlohmann::json to_json() const;
};

// Assembles the full bound Psi(alpha, x0) with every intermediate term.
// Requires alpha in (1, min(K1,K2)-1); throws Error("AlphaOutOfRange").
BoundReport psi_bound(const Model& m, double alpha, SystemState x0, const BoundParams& bp,
                      Theta0Mode mode, const BoundTolerances& tol = {});

// Pair-moment constant bounding E(1+meet_time)^alpha for two concrete
// initial states (derivation-chain indexing).
double coupling_moment_constant(const Model& m, double alpha, SystemState a, SystemState b,
                                const BoundParams& bp, Theta0Mode mode,
                                const BoundTolerances& tol = {});

struct WindowSearchSpec {
    double r_min = 0.0; // clamped above theta0
    double r_max = 3.0;
    int r_points = 40;
    double n_min = 1.0;
    double n_max = 20.0;
    int n_points = 20;     // used when integer_n is false
    bool integer_n = true; // integer N by default; real N behind this flag
    int refine_passes = 2;
};

struct WindowResult {
    BoundParams best;
    BoundReport report;
    long cells_examined = 0;
    long cells_feasible = 0;
};

// Deterministic grid search minimizing Psi over the window parameters.
// Psi depends on (R,N) only through q, monotonically, so the search
// maximizes p and evaluates the full report once at the winner. Ties break
// lexicographically on (Psi, R, N). Throws Error("NoFeasiblePoint") when no
// cell satisfies the window constraints.
WindowResult optimize_window(const Model& m, double alpha, SystemState x0,
                             const WindowSearchSpec& spec, Theta0Mode mode,
                             const BoundTolerances& tol = {});

} // namespace availbound
