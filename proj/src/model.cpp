#include "availbound/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "availbound/errors.hpp"
#include "availbound/numerics.hpp"

namespace availbound {

namespace detail {

double HazardTable::hazard_at(double t) const {
    if (t <= s.front()) return lam.front();
    if (t >= s.back()) return lam.back();
    const auto it = std::upper_bound(s.begin(), s.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
    const double ds = s[i + 1] - s[i];
    const double g = std::log(lam[i + 1] / lam[i]) / ds;
    return lam[i] * std::exp(g * (t - s[i]));
}

double HazardTable::cum_hazard(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= s.back()) return cumhaz.back() + lam.back() * (t - s.back());
    const auto it = std::upper_bound(s.begin(), s.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
    const double ds = s[i + 1] - s[i];
    const double g = std::log(lam[i + 1] / lam[i]) / ds;
    const double d = t - s[i];
    if (std::fabs(g) < 1e-14) return cumhaz[i] + lam[i] * d;
    return cumhaz[i] + lam[i] * std::expm1(g * d) / g;
}

double CdfTable::cdf(double t) const {
    if (t < s.front()) return 0.0;
    if (t >= s.back()) {
        const double envelope = 1.0 - std::pow(1.0 + t, -k2);
        return std::max(F.back(), envelope);
    }
    // last entry with abscissa <= t gives the right-continuous value
    const auto it = std::upper_bound(s.begin(), s.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
    if (s[i] == t) return F[i];
    const double surv_l = 1.0 - F[i];
    const double surv_r = 1.0 - F[i + 1];
    const double w = (t - s[i]) / (s[i + 1] - s[i]);
    if (surv_l <= 0.0) return 1.0;
    if (surv_r <= 0.0) {
        // law reaches 1 inside this segment; fall back to linear in F
        return F[i] + w * (F[i + 1] - F[i]);
    }
    return 1.0 - surv_l * std::pow(surv_r / surv_l, w);
}

void SurvivalIntegral::build(std::vector<double> boundaries,
                             const std::function<double(double)>& surv,
                             bool exp_tail, double rate_or_k) {
    x = std::move(boundaries);
    cum.assign(x.size(), 0.0);
    QuadOptions opt;
    opt.abs_tol = 1e-13;
    for (std::size_t i = 1; i < x.size(); ++i)
        cum[i] = cum[i - 1] + integrate_finite(surv, x[i - 1], x[i], opt).value;
    exponential_tail = exp_tail;
    tail_surv = surv(x.back());
    if (exp_tail) {
        tail_rate = rate_or_k;
        total = cum.back() + tail_surv / tail_rate;
    } else {
        tail_k = rate_or_k;
        // beyond x.back() survival is exactly (1+s)^-k, unless the law has
        // already reached 1 (bounded support, no tail mass)
        total = cum.back() + (tail_surv > 0.0
                                  ? std::pow(1.0 + x.back(), 1.0 - tail_k) / (tail_k - 1.0)
                                  : 0.0);
    }
}

double SurvivalIntegral::invert(double mass, const std::function<double(double)>& surv) const {
    if (mass <= 0.0) return 0.0;
    if (mass < cum.back()) {
        const auto it = std::upper_bound(cum.begin(), cum.end(), mass);
        const std::size_t i = static_cast<std::size_t>(it - cum.begin()) - 1;
        QuadOptions opt;
        opt.abs_tol = 1e-13;
        auto partial = [&](double t) {
            return cum[i] + integrate_finite(surv, x[i], t, opt).value;
        };
        return invert_monotone(partial, mass, x[i], x[i + 1], 1e-11);
    }
    const double rest = mass - cum.back();
    if (exponential_tail) {
        const double arg = 1.0 - rest * tail_rate / tail_surv;
        if (arg <= 0.0) return x.back() + 700.0 / tail_rate; // mass ~ total, clamp
        return x.back() - std::log(arg) / tail_rate;
    }
    const double base = std::pow(1.0 + x.back(), 1.0 - tail_k) - rest * (tail_k - 1.0);
    if (base <= 0.0) return 1e300;
    return std::pow(base, -1.0 / (tail_k - 1.0)) - 1.0;
}

} // namespace detail

namespace {

void check_exponents(const ModelParams& p) {
    if (!(p.k1 > 3.0))
        fail("ExponentTooSmall", "K1 must exceed 3, got " + std::to_string(p.k1));
    if (!(p.k2 > 3.0))
        fail("ExponentTooSmall", "K2 must exceed 3, got " + std::to_string(p.k2));
    if (!(p.lambda > p.k1))
        fail("LambdaNotDominating",
             "Lambda must exceed K1 (" + std::to_string(p.lambda) + " <= " + std::to_string(p.k1) + ")");
}

detail::HazardTable build_hazard_table(const ModelParams& p) {
    const auto& g = p.hazard_grid;
    if (g.s.size() < 1 || g.s.size() != g.lambda.size())
        fail("InvalidGrid", "hazard grid needs matching nonempty s/lambda columns");
    if (g.s.front() != 0.0) fail("InvalidGrid", "hazard grid must start at s = 0");
    for (std::size_t i = 1; i < g.s.size(); ++i)
        if (!(g.s[i] > g.s[i - 1]))
            fail("InvalidGrid", "hazard grid abscissae must be strictly increasing");
    for (double l : g.lambda)
        if (!(l > 0.0) || !std::isfinite(l))
            fail("InvalidGrid", "hazard values must be positive and finite");

    detail::HazardTable t;
    t.s = g.s;
    t.lam = g.lambda;
    t.cumhaz.assign(t.s.size(), 0.0);
    for (std::size_t i = 1; i < t.s.size(); ++i) {
        const double ds = t.s[i] - t.s[i - 1];
        const double gg = std::log(t.lam[i] / t.lam[i - 1]) / ds;
        t.cumhaz[i] = t.cumhaz[i - 1] +
                      (std::fabs(gg) < 1e-14 ? t.lam[i - 1] * ds
                                             : t.lam[i - 1] * std::expm1(gg * ds) / gg);
    }

    // admissibility on nodes and on a 10x refinement of the interpolant
    auto check_point = [&](double s) {
        const double l = t.hazard_at(s);
        if (l > p.lambda * (1.0 + 1e-12))
            fail("HazardBoundViolated",
                 "lambda(" + std::to_string(s) + ") = " + std::to_string(l) + " exceeds Lambda");
        if (l < p.k1 / (1.0 + s) * (1.0 - 1e-12))
            fail("HazardBoundViolated",
                 "lambda(" + std::to_string(s) + ") = " + std::to_string(l) + " below K1/(1+s)");
    };
    for (double s : t.s) check_point(s);
    for (std::size_t i = 1; i < t.s.size(); ++i)
        for (int j = 1; j < 10; ++j)
            check_point(t.s[i - 1] + (t.s[i] - t.s[i - 1]) * j / 10.0);
    return t;
}

detail::CdfTable build_cdf_table(const ModelParams& p) {
    const auto& g = p.repair_grid;
    if (g.s.size() < 1 || g.s.size() != g.F.size())
        fail("InvalidGrid", "repair grid needs matching nonempty s/F columns");
    if (g.s.front() != 0.0) fail("InvalidGrid", "repair grid must start at s = 0");
    for (std::size_t i = 1; i < g.s.size(); ++i) {
        if (!(g.s[i] >= g.s[i - 1]))
            fail("InvalidGrid", "repair grid abscissae must be nondecreasing");
        if (!(g.F[i] >= g.F[i - 1]))
            fail("InvalidGrid", "repair CDF must be nondecreasing");
    }
    for (double v : g.F)
        if (!(v >= 0.0 && v <= 1.0)) fail("InvalidGrid", "repair CDF values must lie in [0,1]");
    // an atom at 0 would create zero-length repair periods
    std::size_t last0 = 0;
    while (last0 + 1 < g.s.size() && g.s[last0 + 1] == 0.0) ++last0;
    if (g.F[last0] > 0.0) fail("InvalidGrid", "repair law must not place mass at s = 0");

    detail::CdfTable t;
    t.s = g.s;
    t.F = g.F;
    t.k2 = p.k2;

    auto check_point = [&](double s) {
        const double envelope = 1.0 - std::pow(1.0 + s, -p.k2);
        if (t.cdf(s) < envelope - 1e-12)
            fail("RepairTailViolated",
                 "F2(" + std::to_string(s) + ") = " + std::to_string(t.cdf(s)) +
                     " below 1-(1+s)^-K2 = " + std::to_string(envelope));
    };
    for (double s : t.s) check_point(s);
    for (std::size_t i = 1; i < t.s.size(); ++i) {
        if (t.s[i] == t.s[i - 1]) continue;
        for (int j = 1; j < 10; ++j) check_point(t.s[i - 1] + (t.s[i] - t.s[i - 1]) * j / 10.0);
    }
    return t;
}

std::vector<double> dedup_sorted(std::vector<double> xs) {
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

} // namespace

Model Model::validate(const ModelParams& raw) {
    check_exponents(raw);
    Model m;
    m.p_ = raw;

    if (raw.work_family == WorkFamily::TabulatedHazard)
        m.work_table_ = build_hazard_table(raw);
    if (raw.repair_family == RepairFamily::TabulatedCdf)
        m.repair_table_ = build_cdf_table(raw);

    // moments: closed form for pareto, tail-integral quadrature otherwise
    if (raw.work_family == WorkFamily::ParetoHazard) {
        m.mean_work_ = 1.0 / (raw.k1 - 1.0);
        m.m2_work_ = 2.0 / ((raw.k1 - 1.0) * (raw.k1 - 2.0));
    } else {
        auto surv = [&m](double s) { return std::exp(-m.work_table_.cum_hazard(s)); };
        m.mean_work_ = integrate_semi_infinite(surv, 0.0).value;
        m.m2_work_ =
            2.0 * integrate_semi_infinite([&](double s) { return s * surv(s); }, 0.0).value;

        std::vector<double> cells = dedup_sorted(m.work_table_.s);
        auto sv = [&m](double s) { return std::exp(-m.work_table_.cum_hazard(s)); };
        m.eq_work_.build(std::move(cells), sv, /*exp_tail=*/true, m.work_table_.lam.back());
    }
    if (raw.repair_family == RepairFamily::Pareto) {
        m.mean_repair_ = 1.0 / (raw.k2 - 1.0);
        m.m2_repair_ = 2.0 / ((raw.k2 - 1.0) * (raw.k2 - 2.0));
    } else {
        auto surv = [&m](double s) { return 1.0 - m.repair_table_.cdf(s); };
        m.mean_repair_ = integrate_semi_infinite(surv, 0.0).value;
        m.m2_repair_ =
            2.0 * integrate_semi_infinite([&](double s) { return s * surv(s); }, 0.0).value;

        // cells cover the grid plus the flat stretch until the pareto
        // envelope takes over
        std::vector<double> cells = dedup_sorted(m.repair_table_.s);
        const double surv_last = 1.0 - m.repair_table_.F.back();
        if (surv_last > 0.0) {
            const double cross = std::pow(surv_last, -1.0 / raw.k2) - 1.0;
            if (cross > cells.back()) cells.push_back(cross);
        }
        m.eq_repair_.build(std::move(cells), surv, /*exp_tail=*/false, raw.k2);
    }
    m.avail_ = m.mean_work_ / (m.mean_work_ + m.mean_repair_);
    return m;
}

double Model::cdf(Regime j, double s) const {
    if (s <= 0.0) return 0.0;
    if (j == Regime::Working) {
        if (work_is_pareto()) return 1.0 - std::pow(1.0 + s, -p_.k1);
        return -std::expm1(-work_table_.cum_hazard(s));
    }
    if (repair_is_pareto()) return 1.0 - std::pow(1.0 + s, -p_.k2);
    return repair_table_.cdf(s);
}

double Model::hazard(double s) const {
    if (work_is_pareto()) return p_.k1 / (1.0 + s);
    return work_table_.hazard_at(s);
}

double Model::pdf_work(double s) const {
    if (work_is_pareto()) return p_.k1 * std::pow(1.0 + s, -p_.k1 - 1.0);
    return work_table_.hazard_at(s) * std::exp(-work_table_.cum_hazard(s));
}

double Model::residual_cdf(Regime j, double x, double s) const {
    if (x <= 0.0) return cdf(j, s);
    if (s <= 0.0) return 0.0;
    if (j == Regime::Working && work_is_pareto())
        return 1.0 - std::pow((1.0 + x) / (1.0 + x + s), p_.k1);
    if (j == Regime::Repair && repair_is_pareto())
        return 1.0 - std::pow((1.0 + x) / (1.0 + x + s), p_.k2);
    const double tail_x = 1.0 - cdf(j, x);
    if (!(tail_x > 0.0))
        fail("RangeError", "elapsed time " + std::to_string(x) + " is beyond the law's support");
    return 1.0 - (1.0 - cdf(j, x + s)) / tail_x;
}

double Model::residual_pdf_work(double x, double s) const {
    if (work_is_pareto())
        return p_.k1 * std::pow(1.0 + x, p_.k1) * std::pow(1.0 + x + s, -p_.k1 - 1.0);
    const double tail_x = std::exp(-work_table_.cum_hazard(x));
    return pdf_work(x + s) / tail_x;
}

double Model::quantile(Regime j, double u) const {
    if (u <= 0.0) return 0.0;
    if (j == Regime::Working && work_is_pareto())
        return std::pow(1.0 - u, -1.0 / p_.k1) - 1.0;
    if (j == Regime::Repair && repair_is_pareto())
        return std::pow(1.0 - u, -1.0 / p_.k2) - 1.0;
    auto F = [this, j](double s) { return cdf(j, s); };
    try {
        return invert_monotone(F, u, 0.0, 1.0, p_.inversion_tol);
    } catch (const Error& e) {
        fail("InversionFailed", std::string("tabulated law could not be inverted: ") + e.what());
    }
}

double Model::residual_quantile(Regime j, double x, double u) const {
    if (u <= 0.0) return 0.0;
    if (x <= 0.0) return quantile(j, u);
    if (j == Regime::Working && work_is_pareto())
        return (1.0 + x) * (std::pow(1.0 - u, -1.0 / p_.k1) - 1.0);
    if (j == Regime::Repair && repair_is_pareto())
        return (1.0 + x) * (std::pow(1.0 - u, -1.0 / p_.k2) - 1.0);
    const double tail_x = 1.0 - cdf(j, x);
    if (!(tail_x > 0.0))
        fail("RangeError", "elapsed time " + std::to_string(x) + " is beyond the law's support");
    const double target = 1.0 - (1.0 - u) * tail_x;
    return std::max(0.0, quantile(j, target) - x);
}

double Model::equilibrium_quantile(Regime j, double u) const {
    if (u <= 0.0) return 0.0;
    const double k = k_of(j);
    if (j == Regime::Working && work_is_pareto())
        return std::pow(1.0 - u, -1.0 / (k - 1.0)) - 1.0;
    if (j == Regime::Repair && repair_is_pareto())
        return std::pow(1.0 - u, -1.0 / (k - 1.0)) - 1.0;
    const auto& table = (j == Regime::Working) ? eq_work_ : eq_repair_;
    auto surv = [this, j](double s) { return 1.0 - cdf(j, s); };
    return table.invert(u * table.total, surv);
}

SystemState Model::equilibrium_sample(Rng& rng) const {
    const Regime j = rng.uniform() < avail_ ? Regime::Working : Regime::Repair;
    return {j, equilibrium_quantile(j, rng.uniform())};
}

Model make_pareto_model(double k1, double k2, double lambda) {
    ModelParams p;
    p.k1 = k1;
    p.k2 = k2;
    p.lambda = lambda;
    p.work_family = WorkFamily::ParetoHazard;
    p.repair_family = RepairFamily::Pareto;
    return Model::validate(p);
}

} // namespace availbound
