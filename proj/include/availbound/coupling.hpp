#pragma once

#include <cstdint>
#include <vector>

#include "availbound/bound.hpp"
#include "availbound/model.hpp"

namespace availbound {

// Joint state of the paired process. Once coupled, the components stay
// identical forever.
//
// After a failed working-working splice the survivor's drawn remainder is
// pinned in the state and consumed across later events: the splice reveals
// the survivor's draw through the shared uniform, so redrawing it from the
// residual law would bias its period law. Jumps still follow the
// achiever-of-the-minimum update rule.
struct PairedState {
    SystemState z1;
    SystemState z2;
    bool coupled = false;
    double clock = 0.0;
    int pending_owner = 0;          // 0 none, else 1 or 2
    double pending_remaining = 0.0; // time until the pinned jump fires
};

// Minimum of the two residual working densities with elapsed times x and y,
// its primitive Phi, the leftover Phi_hat = F^(x) - Phi, and the coupling
// mass kappa_xy = integral of the min. Arguments are canonicalized
// internally so that both orderings share bit-identical computations.
//
// For the pareto hazard family the two residual densities cross exactly
// once; the crossing point is computed in closed form and the claimed
// ordering on each side is asserted at construction. Tabulated laws fall
// back to pointwise evaluation under quadrature.
class MinDensityKit {
public:
    MinDensityKit(const Model& m, double x, double y);

    double x() const { return x_; }
    double y() const { return y_; }
    double kappa_xy() const { return kappa_; }

    double phi(double s) const;
    double Phi(double s) const;
    double Phi_hat(double s) const; // F^(x)(s) - Phi(s), first-argument marginal

    // Generalized inverses used by the splice: u in [0, kappa) for Phi,
    // v in [0, 1-kappa) for the leftover of the given marginal.
    double invert_Phi(double u) const;
    double invert_Phi_hat(double marginal_elapsed, double v) const;

private:
    double Phi_hat_for(double elapsed, double s) const;

    const Model* m_;
    double x_ = 0.0, y_ = 0.0; // as given
    double lo_ = 0.0, hi_ = 0.0;
    bool pareto_ = false;
    bool degenerate_ = false; // x == y
    // pareto closed-form pieces
    double sstar_ = 0.0;
    double f_lo_at_sstar_ = 0.0, f_hi_at_sstar_ = 0.0;
    double kappa_ = 1.0;
    double cdf_lo_sstar_ = 0.0, cdf_hi_sstar_ = 0.0;
};

struct CoupledDraw {
    double theta_x = 0.0; // marginal F1^(x)
    double theta_y = 0.0; // marginal F1^(y)
    bool equal = false;   // the two draws coincide (probability kappa_xy)
};

// One uniform drives both residual draws; they coincide with probability
// kappa_xy and each has the exact residual marginal.
CoupledDraw sample_coupled_pair(const Model& m, double x, double y, Rng& rng);

// One transition of the paired process: independent residual draws when the
// states differ and at least one component is under repair; the spliced
// coupled pair when both are working; a single shared draw once identical.
PairedState step_paired(const Model& m, const PairedState& st, Rng& rng);

// Meet time of the pair started from (a, b); runs step_paired until the
// components merge. Throws Error("CapExceeded") after event_cap events.
double coupling_time(const Model& m, SystemState a, SystemState b, Rng& rng, long event_cap);

struct CouplingStats {
    std::vector<double> meet_times;
    double alpha = 0.0;
    long n_runs = 0;
    long cap_exceeded = 0;
    double moment_mean = 0.0;     // empirical E(1+meet)^alpha
    double moment_upper_ci = 0.0; // one-sided upper bound at ci_level
    double ci_level = 0.0;
    std::uint64_t seed = 0;
};

CouplingStats run_coupling(const Model& m, SystemState a, SystemState b, long n_runs,
                           double alpha, std::uint64_t root_seed, long event_cap,
                           double ci_level = 0.99, int threads = 1);

// Per-regeneration-cycle audit of the coupling scheme: for every cycle of
// the reference component (the one regenerating later), whether the window
// event occurred and whether the pair merged before the cycle ended.
struct MeetRateAudit {
    long cycles = 0;
    long window_events = 0;
    long merges = 0;
    double window_freq = 0.0;
    double merge_freq = 0.0;
    double pi_bound = 0.0; // theoretical lower bound on the window frequency
    double p_bound = 0.0;  // theoretical lower bound on the merge frequency
    long runs = 0;
    // per-cycle indicator log, aligned: window event seen / merged by cycle end
    std::vector<bool> cycle_window;
    std::vector<bool> cycle_merged;
};

MeetRateAudit meet_rate_audit(const Model& m, const BoundParams& bp, Theta0Mode mode,
                              SystemState a, SystemState b, long n_cycles,
                              std::uint64_t root_seed, long event_cap = 1000000);

// Completed per-component period lengths from paired runs (first, residual
// periods skipped); used for the marginal-preservation checks.
struct PairedPeriodSamples {
    std::vector<double> work;
    std::vector<double> repair;
};

PairedPeriodSamples collect_paired_periods(const Model& m, SystemState a, SystemState b,
                                           long n_periods, std::uint64_t root_seed,
                                           long events_per_run = 4000);

} // namespace availbound
