#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "availbound/rng.hpp"

namespace availbound {

enum class Regime : int { Working = 1, Repair = 2 };

constexpr Regime other(Regime r) {
    return r == Regime::Working ? Regime::Repair : Regime::Working;
}

// (regime, elapsed time in regime). Elapsed must satisfy F_regime(elapsed) < 1.
struct SystemState {
    Regime regime = Regime::Working;
    double elapsed = 0.0;

    friend bool operator==(const SystemState& a, const SystemState& b) {
        return a.regime == b.regime && a.elapsed == b.elapsed;
    }
};

enum class WorkFamily { ParetoHazard, TabulatedHazard };
enum class RepairFamily { Pareto, TabulatedCdf };

// Tabulated hazard lambda(s) on a strictly increasing grid starting at 0;
// log-linear between nodes, constant beyond the last node.
struct HazardGrid {
    std::vector<double> s;
    std::vector<double> lambda;
};

// Tabulated right-continuous CDF; duplicate abscissae encode jumps
// (left value first). Survival is log-linear between nodes; beyond the last
// node the CDF continues as max(F_last, 1-(1+s)^-K2).
struct CdfGrid {
    std::vector<double> s;
    std::vector<double> F;
};

struct ModelParams {
    double k1 = 0.0;     // working tail exponent, Lambda > k1 > 3
    double k2 = 0.0;     // repair tail exponent, > 3
    double lambda = 0.0; // hazard upper bound
    WorkFamily work_family = WorkFamily::ParetoHazard;
    RepairFamily repair_family = RepairFamily::Pareto;
    HazardGrid hazard_grid;  // used iff work_family == TabulatedHazard
    CdfGrid repair_grid;     // used iff repair_family == TabulatedCdf
    double inversion_tol = 1e-12; // abscissa tolerance for numeric CDF inversion
};

namespace detail {

struct HazardTable {
    std::vector<double> s, lam, cumhaz; // cumhaz[i] = H(s[i])
    double hazard_at(double t) const;
    double cum_hazard(double t) const;
};

struct CdfTable {
    std::vector<double> s, F;
    double k2 = 0.0; // tail exponent used for the extension beyond the grid
    double cdf(double t) const;
};

// Piecewise cumulative integral of a survival function with an analytic
// closed-form tail; backs equilibrium (stationary-excess) sampling for
// tabulated laws. The survival callable is supplied at each use so the
// struct stays plain data.
struct SurvivalIntegral {
    std::vector<double> x;   // cell boundaries, x[0] = 0
    std::vector<double> cum; // cum[i] = integral of survival over [0, x[i]]
    double total = 0.0;      // full integral (the mean)
    // tail beyond x.back(): exponential (work) or pareto (repair)
    bool exponential_tail = false;
    double tail_rate = 0.0; // decay rate of the exponential tail
    double tail_k = 0.0;    // exponent of the pareto tail
    double tail_surv = 0.0; // survival at x.back()

    void build(std::vector<double> boundaries, const std::function<double(double)>& surv,
               bool exp_tail, double rate_or_k);
    double invert(double mass, const std::function<double(double)>& surv) const;
};

} // namespace detail

// A validated model: the pair of lifetime laws plus cached moments.
// Immutable after validation; safe to share across threads.
class Model {
public:
    // Checks the admissibility conditions and returns the usable model.
    // Throws Error with code ExponentTooSmall, LambdaNotDominating,
    // HazardBoundViolated, RepairTailViolated or InvalidGrid.
    static Model validate(const ModelParams& raw);

    const ModelParams& params() const { return p_; }
    double k_of(Regime j) const { return j == Regime::Working ? p_.k1 : p_.k2; }
    double k_min() const { return p_.k1 < p_.k2 ? p_.k1 : p_.k2; }
    bool work_is_pareto() const { return p_.work_family == WorkFamily::ParetoHazard; }
    bool repair_is_pareto() const { return p_.repair_family == RepairFamily::Pareto; }

    double cdf(Regime j, double s) const;
    double hazard(double s) const;          // working law only
    double pdf_work(double s) const;
    double residual_cdf(Regime j, double x, double s) const;
    double residual_pdf_work(double x, double s) const;

    // Generalized inverses of the CDFs (u in [0,1)).
    double quantile(Regime j, double u) const;
    double residual_quantile(Regime j, double x, double u) const;

    double sample(Regime j, Rng& rng) const { return quantile(j, rng.uniform()); }
    double sample_residual(Regime j, double x, Rng& rng) const {
        return residual_quantile(j, x, rng.uniform());
    }

    double mean(Regime j) const { return j == Regime::Working ? mean_work_ : mean_repair_; }
    double mean_work() const { return mean_work_; }
    double mean_repair() const { return mean_repair_; }
    double second_moment(Regime j) const { return j == Regime::Working ? m2_work_ : m2_repair_; }
    double limiting_availability() const { return avail_; }

    // Draw from the stationary law: regime Working with probability A,
    // elapsed from the stationary-excess density (1-F_j(x))/E.
    SystemState equilibrium_sample(Rng& rng) const;
    double equilibrium_quantile(Regime j, double u) const;

private:
    Model() = default;

    ModelParams p_;
    detail::HazardTable work_table_;
    detail::CdfTable repair_table_;
    detail::SurvivalIntegral eq_work_, eq_repair_; // built for tabulated laws only
    double mean_work_ = 0.0, mean_repair_ = 0.0;
    double m2_work_ = 0.0, m2_repair_ = 0.0;
    double avail_ = 0.0;
};

// Convenience: the canonical Pareto/Pareto model used throughout the tests.
Model make_pareto_model(double k1, double k2, double lambda);

} // namespace availbound
