#include "availbound/bound.hpp"

#include <cmath>
#include <string>

#include "availbound/errors.hpp"
#include "availbound/numerics.hpp"

namespace availbound {

MomentBounds moment_bounds(const Model& m, double a, double b) {
    const double k1 = m.params().k1;
    const double k2 = m.params().k2;
    if (!(a >= 1.0) || !(b >= 1.0))
        fail("RangeError", "moment orders must be at least 1");
    if (a >= k1 || b >= k2)
        fail("RangeError", "moment order must stay below the tail exponent");
    MomentBounds mb;
    mb.mu_a = k1 * std::tgamma(a) / std::pow(m.params().lambda, a);
    mb.m1_a = a / (k1 - a);
    mb.m2_b = b / (k2 - b);
    return mb;
}

double big_m(const Model& m, Regime j, double k, const BoundTolerances& tol) {
    const double kj = m.k_of(j);
    if (!(k >= 1.0)) fail("RangeError", "moment order must be at least 1");
    if (k >= kj)
        fail("DivergentMoment",
             "M_j(k) diverges for k = " + std::to_string(k) + " >= K_j = " + std::to_string(kj));
    QuadOptions opt;
    opt.abs_tol = tol.quad_abs;
    auto f = [kj, k](double s) { return std::pow(s, k - 1.0) * std::pow(1.0 + s, -kj); };
    return k * integrate_semi_infinite(f, 0.0, opt).value;
}

double big_m_x(const Model& m, Regime j, double x, double k, const BoundTolerances& tol) {
    if (x <= 0.0) return big_m(m, j, k, tol);
    const double kj = m.k_of(j);
    if (!(k >= 1.0)) fail("RangeError", "moment order must be at least 1");
    if (k >= kj)
        fail("DivergentMoment",
             "M_j^(x)(k) diverges for k = " + std::to_string(k) + " >= K_j = " + std::to_string(kj));
    const double tail = 1.0 - m.cdf(j, x);
    if (!(tail > 0.0))
        fail("RangeError", "conditional moment needs F_j(x) < 1");
    QuadOptions opt;
    opt.abs_tol = tol.quad_abs;
    auto f = [kj, k, x](double s) { return std::pow(s, k - 1.0) * std::pow(1.0 + s + x, -kj); };
    return k / tail * integrate_semi_infinite(f, 0.0, opt).value;
}

double kappa(const Model& m, double T, const BoundTolerances& tol) {
    const double k1 = m.params().k1;
    const double lam = m.params().lambda;
    QuadOptions opt;
    opt.abs_tol = tol.quad_abs;
    auto f = [k1, lam, T](double s) { return k1 * std::exp(-lam * s) / (1.0 + T + s); };
    return integrate_semi_infinite(f, 0.0, opt).value;
}

double theta0_bracket(const Model& m) {
    const MomentBounds mb1 = moment_bounds(m, 1.0, 1.0);
    const MomentBounds mb2 = moment_bounds(m, 2.0, 2.0);
    return (mb2.m1_a + 2.0 * mb1.m1_a * mb1.m2_b + mb2.m2_b) / (2.0 * mb1.mu_a);
}

double theta0_exact(const Model& m) {
    const double exi = m.mean_work(), eeta = m.mean_repair();
    const double e2 = m.second_moment(Regime::Working) + 2.0 * exi * eeta +
                      m.second_moment(Regime::Repair);
    return e2 / (2.0 * (exi + eeta));
}

double theta0_value(const Model& m, Theta0Mode mode) {
    return mode == Theta0Mode::Exact ? theta0_exact(m) : theta0_bracket(m);
}

CouplingBound coupling_q(const Model& m, const BoundParams& bp, Theta0Mode mode,
                         const BoundTolerances& tol) {
    if (!(bp.N >= 1.0)) fail("RangeError", "window multiplier N must be at least 1");
    CouplingBound cb;
    cb.theta0 = theta0_value(m, mode);
    if (!(bp.R > cb.theta0))
        fail("InvalidWindow", "R = " + std::to_string(bp.R) +
                                  " must exceed theta0 = " + std::to_string(cb.theta0));
    const double lam = m.params().lambda;
    const double k1 = m.params().k1;
    const double window = std::exp(-lam * bp.R) - std::pow(1.0 + bp.N * bp.R, -k1);
    if (!(window > 0.0))
        fail("InvalidWindow",
             "need e^{-Lambda R} > (1+NR)^{-K1}; increase N or decrease R");
    cb.kappa_NR = kappa(m, bp.N * bp.R, tol);
    cb.pi_RN = (1.0 - cb.theta0 / bp.R) * window;
    cb.p = cb.pi_RN * cb.kappa_NR;
    cb.q = 1.0 - cb.p;
    if (!(cb.p > 0.0 && cb.p < 1.0))
        fail("InvalidWindow", "coupling probability left (0,1): p = " + std::to_string(cb.p));
    return cb;
}

namespace {

void check_alpha(const Model& m, double alpha) {
    const double k = m.k_min();
    if (!(alpha > 1.0 && alpha < k - 1.0))
        fail("AlphaOutOfRange", "alpha must lie in (1, " + std::to_string(k - 1.0) +
                                    "), got " + std::to_string(alpha));
}

// Initial-state contribution to the series bracket: regenerating from a
// working state costs a residual working period plus a repair period
// (Jensen factor 2^{alpha-1}); from a repair state only the residual repair.
struct InitialTerm {
    double m_x0 = 0.0;
    double value = 0.0;
};

InitialTerm initial_term(const Model& m, double alpha, SystemState x0, double m2_alpha,
                         const BoundTolerances& tol) {
    InitialTerm it;
    if (x0.regime == Regime::Working) {
        it.m_x0 = big_m_x(m, Regime::Working, x0.elapsed, alpha, tol);
        it.value = std::pow(2.0, alpha - 1.0) * (it.m_x0 + m2_alpha);
    } else {
        it.m_x0 = big_m_x(m, Regime::Repair, x0.elapsed, alpha, tol);
        it.value = it.m_x0;
    }
    return it;
}

} // namespace

double BoundReport::bound_at(double t) const { return psi / std::pow(1.0 + t, alpha); }

nlohmann::json BoundReport::to_json() const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["x0"] = {{"regime", static_cast<int>(x0.regime)}, {"elapsed", x0.elapsed}};
    j["R"] = R;
    j["N"] = N;
    j["theta0_mode"] = theta0_mode == Theta0Mode::Exact ? "exact" : "bracket";
    j["theta0"] = theta0;
    j["kappa_NR"] = kappa_NR;
    j["pi_RN"] = pi_RN;
    j["p"] = p;
    j["q"] = q;
    j["M1_alpha"] = m1_alpha;
    j["M2_alpha"] = m2_alpha;
    j["M_x0_alpha"] = m_x0_alpha;
    j["initial_term"] = initial_term;
    j["availability"] = availability;
    j["mean_work"] = mean_work;
    j["mean_repair"] = mean_repair;
    j["stationary_work_term"] = stationary_work_term;
    j["stationary_repair_term"] = stationary_repair_term;
    j["bracket_b"] = bracket_b;
    j["series_factor"] = series_factor;
    j["psi"] = psi;
    j["psi_derivation_tight"] = psi_derivation_tight;
    return j;
}

BoundReport psi_bound(const Model& m, double alpha, SystemState x0, const BoundParams& bp,
                      Theta0Mode mode, const BoundTolerances& tol) {
    check_alpha(m, alpha);
    const CouplingBound cb = coupling_q(m, bp, mode, tol);
    if (!(cb.q < 1.0)) fail("SeriesDivergent", "q must stay below 1");

    BoundReport r;
    r.alpha = alpha;
    r.x0 = x0;
    r.R = bp.R;
    r.N = bp.N;
    r.theta0_mode = mode;
    r.theta0 = cb.theta0;
    r.kappa_NR = cb.kappa_NR;
    r.pi_RN = cb.pi_RN;
    r.p = cb.p;
    r.q = cb.q;

    const double k1 = m.params().k1;
    const double k2 = m.params().k2;
    r.m1_alpha = big_m(m, Regime::Working, alpha, tol);
    r.m2_alpha = big_m(m, Regime::Repair, alpha, tol);
    const InitialTerm it = initial_term(m, alpha, x0, r.m2_alpha, tol);
    r.m_x0_alpha = it.m_x0;
    r.initial_term = it.value;

    r.availability = m.limiting_availability();
    r.mean_work = m.mean_work();
    r.mean_repair = m.mean_repair();
    r.stationary_work_term =
        std::pow(2.0, alpha - 1.0) * r.availability *
        (alpha / ((k1 - alpha) * (k1 - alpha - 1.0) * r.mean_work) + r.m2_alpha);
    r.stationary_repair_term =
        (1.0 - r.availability) * alpha / ((k2 - alpha) * (k2 - alpha - 1.0) * r.mean_repair);

    r.bracket_b = 1.0 + r.initial_term + r.stationary_work_term + r.stationary_repair_term;

    // i-dependent terms (i+1)M1 + i M2 are summed inside the series.
    const double a_coef = r.bracket_b + r.m1_alpha;
    const double b_coef = r.m1_alpha + r.m2_alpha;
    r.psi = sum_affine_power_series(alpha, r.q, a_coef, b_coef, 0, tol.series_rel);
    r.series_factor = sum_affine_power_series(alpha, r.q, 1.0, 0.0, 0, tol.series_rel);
    r.psi_derivation_tight =
        sum_affine_power_series(alpha - 1.0, r.q, a_coef, b_coef, 1, tol.series_rel) / r.q;
    return r;
}

double coupling_moment_constant(const Model& m, double alpha, SystemState a, SystemState b,
                                const BoundParams& bp, Theta0Mode mode,
                                const BoundTolerances& tol) {
    check_alpha(m, alpha);
    const CouplingBound cb = coupling_q(m, bp, mode, tol);
    const double m1 = big_m(m, Regime::Working, alpha, tol);
    const double m2 = big_m(m, Regime::Repair, alpha, tol);
    const double bracket =
        1.0 + initial_term(m, alpha, a, m2, tol).value + initial_term(m, alpha, b, m2, tol).value;
    return sum_affine_power_series(alpha - 1.0, cb.q, bracket + m1, m1 + m2, 1, tol.series_rel) /
           cb.q;
}

WindowResult optimize_window(const Model& m, double alpha, SystemState x0,
                             const WindowSearchSpec& spec, Theta0Mode mode,
                             const BoundTolerances& tol) {
    check_alpha(m, alpha);
    const double theta0 = theta0_value(m, mode);
    double r_lo = std::max(spec.r_min, theta0) * (1.0 + 1e-9);
    if (theta0 >= spec.r_max)
        fail("NoFeasiblePoint", "R range lies entirely at or below theta0");
    double r_hi = spec.r_max;
    double n_lo = std::max(1.0, spec.n_min);
    double n_hi = std::max(n_lo, spec.n_max);

    WindowResult out;
    bool found = false;
    double best_p = 0.0;
    BoundParams best{alpha, 0.0, 0.0};

    const int passes = std::max(0, spec.refine_passes) + 1;
    for (int pass = 0; pass < passes; ++pass) {
        std::vector<double> rs;
        const int rp = std::max(2, spec.r_points);
        for (int i = 0; i < rp; ++i)
            rs.push_back(r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (rp - 1)));
        std::vector<double> ns;
        if (spec.integer_n) {
            for (double n = std::ceil(n_lo); n <= n_hi; n += 1.0) ns.push_back(n);
        } else {
            const int np = std::max(2, spec.n_points);
            for (int i = 0; i < np; ++i)
                ns.push_back(n_lo * std::pow(n_hi / n_lo, static_cast<double>(i) / (np - 1)));
        }

        int best_ri = -1;
        for (std::size_t ri = 0; ri < rs.size(); ++ri) {
            for (double n : ns) {
                ++out.cells_examined;
                BoundParams bp{alpha, rs[ri], n};
                CouplingBound cb;
                try {
                    cb = coupling_q(m, bp, mode, tol);
                } catch (const Error&) {
                    continue;
                }
                ++out.cells_feasible;
                const bool better =
                    cb.p > best_p ||
                    (cb.p == best_p && found &&
                     (bp.R < best.R || (bp.R == best.R && bp.N < best.N)));
                if (!found || better) {
                    found = true;
                    best_p = cb.p;
                    best = bp;
                    best_ri = static_cast<int>(ri);
                }
            }
        }
        if (!found) break;
        // zoom the R range one grid step around the winner (N stays integer)
        if (best_ri >= 0) {
            const double lo = best_ri > 0 ? rs[best_ri - 1] : rs[best_ri];
            const double hi = best_ri + 1 < static_cast<int>(rs.size()) ? rs[best_ri + 1]
                                                                        : rs[best_ri];
            r_lo = std::max(lo, theta0 * (1.0 + 1e-9));
            r_hi = hi;
        }
        if (!spec.integer_n) {
            const double step = std::pow(n_hi / n_lo, 1.0 / std::max(1, spec.n_points - 1));
            n_lo = std::max(1.0, best.N / step);
            n_hi = best.N * step;
        }
    }

    if (!found) fail("NoFeasiblePoint", "no (R,N) cell satisfies the window constraints");
    out.best = best;
    out.report = psi_bound(m, alpha, x0, best, mode, tol);
    return out;
}

} // namespace availbound
