#include "availbound/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "availbound/errors.hpp"
#include "availbound/numerics.hpp"
#include "availbound/stats.hpp"

namespace availbound {

MinDensityKit::MinDensityKit(const Model& m, double x, double y) : m_(&m), x_(x), y_(y) {
    if (!(x >= 0.0) || !(y >= 0.0)) fail("RangeError", "elapsed times must be nonnegative");
    lo_ = std::min(x, y);
    hi_ = std::max(x, y);
    pareto_ = m.work_is_pareto();
    degenerate_ = (lo_ == hi_);
    if (degenerate_) {
        kappa_ = 1.0;
        return;
    }
    if (pareto_) {
        // The residual densities cross exactly once: near 0 the component
        // with the larger elapsed time has the smaller density, beyond the
        // crossing the order flips.
        const double k1 = m.params().k1;
        const double r = std::pow((1.0 + hi_) / (1.0 + lo_), k1 / (k1 + 1.0));
        sstar_ = ((1.0 + hi_) - r * (1.0 + lo_)) / (r - 1.0);
        cdf_lo_sstar_ = m.residual_cdf(Regime::Working, lo_, sstar_);
        cdf_hi_sstar_ = m.residual_cdf(Regime::Working, hi_, sstar_);
        kappa_ = cdf_hi_sstar_ + 1.0 - cdf_lo_sstar_;
        // asserted, not assumed
        const double probe_lo = 0.5 * sstar_;
        const double probe_hi = 2.0 * sstar_ + 1.0;
        if (m.residual_pdf_work(hi_, probe_lo) >
                m.residual_pdf_work(lo_, probe_lo) * (1.0 + 1e-9) ||
            m.residual_pdf_work(lo_, probe_hi) >
                m.residual_pdf_work(hi_, probe_hi) * (1.0 + 1e-9))
            fail("RangeError", "residual density crossing analysis violated");
        return;
    }
    auto pf = [this](double s) { return phi(s); };
    kappa_ = integrate_semi_infinite(pf, 0.0).value;
}

double MinDensityKit::phi(double s) const {
    if (s < 0.0) return 0.0;
    if (degenerate_) return m_->residual_pdf_work(lo_, s);
    if (pareto_)
        return s <= sstar_ ? m_->residual_pdf_work(hi_, s) : m_->residual_pdf_work(lo_, s);
    return std::min(m_->residual_pdf_work(lo_, s), m_->residual_pdf_work(hi_, s));
}

double MinDensityKit::Phi(double s) const {
    if (s <= 0.0) return 0.0;
    if (degenerate_) return m_->residual_cdf(Regime::Working, lo_, s);
    if (pareto_) {
        if (s <= sstar_) return m_->residual_cdf(Regime::Working, hi_, s);
        return cdf_hi_sstar_ + m_->residual_cdf(Regime::Working, lo_, s) - cdf_lo_sstar_;
    }
    // TODO: cache cumulative Phi nodes; the tabulated splice re-integrates
    // from 0 on every bisection probe.
    auto pf = [this](double u) { return phi(u); };
    return integrate_finite(pf, 0.0, s).value;
}

double MinDensityKit::Phi_hat_for(double elapsed, double s) const {
    return m_->residual_cdf(Regime::Working, elapsed, s) - Phi(s);
}

double MinDensityKit::Phi_hat(double s) const { return Phi_hat_for(x_, s); }

double MinDensityKit::invert_Phi(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= kappa_)
        fail("RangeError", "Phi inverse needs u below kappa");
    if (degenerate_) return m_->residual_quantile(Regime::Working, lo_, u);
    if (pareto_) {
        if (u <= cdf_hi_sstar_) return m_->residual_quantile(Regime::Working, hi_, u);
        return m_->residual_quantile(Regime::Working, lo_, u + (1.0 - kappa_));
    }
    auto F = [this](double s) { return Phi(s); };
    return invert_monotone(F, u, 0.0, 1.0, m_->params().inversion_tol);
}

double MinDensityKit::invert_Phi_hat(double marginal_elapsed, double v) const {
    if (degenerate_)
        fail("RangeError", "Phi_hat has no mass when the elapsed times coincide");
    const double mass = 1.0 - kappa_;
    if (v >= mass) fail("RangeError", "Phi_hat inverse needs v below 1-kappa");
    if (v <= 0.0) v = 0.0;
    const double tol = m_->params().inversion_tol;
    if (pareto_) {
        if (marginal_elapsed == lo_) {
            // support [0, sstar]: F^(lo) - F^(hi), increasing there
            auto g = [this](double s) {
                return m_->residual_cdf(Regime::Working, lo_, s) -
                       m_->residual_cdf(Regime::Working, hi_, s);
            };
            return invert_monotone(g, v, 0.0, sstar_, tol);
        }
        // support [sstar, inf): (F^(hi) - F^(lo)) + (1-kappa), increasing
        auto g = [this, mass](double s) {
            return m_->residual_cdf(Regime::Working, hi_, s) -
                   m_->residual_cdf(Regime::Working, lo_, s) + mass;
        };
        return invert_monotone(g, v, sstar_, sstar_ + 1.0 + hi_, tol);
    }
    auto g = [this, marginal_elapsed](double s) { return Phi_hat_for(marginal_elapsed, s); };
    return invert_monotone(g, v, 0.0, 1.0, tol);
}

CoupledDraw sample_coupled_pair(const Model& m, double x, double y, Rng& rng) {
    const MinDensityKit kit(m, x, y);
    const double u = rng.uniform();
    CoupledDraw d;
    if (u < kit.kappa_xy()) {
        const double s = kit.invert_Phi(u);
        d.theta_x = s;
        d.theta_y = s;
        d.equal = true;
        return d;
    }
    const double v = u - kit.kappa_xy();
    d.theta_x = kit.invert_Phi_hat(x, v);
    d.theta_y = kit.invert_Phi_hat(y, v);
    d.equal = false;
    return d;
}

namespace {

SystemState advance_or_jump(SystemState s, double own_theta, double theta_min) {
    if (own_theta == theta_min) return {other(s.regime), 0.0};
    return {s.regime, s.elapsed + theta_min};
}

} // namespace

PairedState step_paired(const Model& m, const PairedState& st, Rng& rng) {
    PairedState out = st;
    if (st.z1 == st.z2 && st.pending_owner == 0) {
        // Case 3: one shared draw, the components evolve identically.
        const double theta = m.sample_residual(st.z1.regime, st.z1.elapsed, rng);
        const SystemState next{other(st.z1.regime), 0.0};
        out.z1 = next;
        out.z2 = next;
        out.clock += theta;
        out.coupled = true;
        return out;
    }
    double theta1, theta2;
    bool splice_miss = false;
    if (st.pending_owner == 0 && st.z1.regime == Regime::Working &&
        st.z2.regime == Regime::Working) {
        // Case 2: both working, one uniform drives the spliced pair.
        const CoupledDraw d = sample_coupled_pair(m, st.z1.elapsed, st.z2.elapsed, rng);
        theta1 = d.theta_x;
        theta2 = d.theta_y;
        splice_miss = !d.equal;
    } else {
        // Case 1: independent residual draws; a pinned remainder counts down
        // instead of being redrawn.
        theta1 = st.pending_owner == 1 ? st.pending_remaining
                                       : m.sample_residual(st.z1.regime, st.z1.elapsed, rng);
        theta2 = st.pending_owner == 2 ? st.pending_remaining
                                       : m.sample_residual(st.z2.regime, st.z2.elapsed, rng);
    }
    const double theta = std::min(theta1, theta2);
    out.z1 = advance_or_jump(st.z1, theta1, theta);
    out.z2 = advance_or_jump(st.z2, theta2, theta);
    out.clock += theta;
    out.pending_owner = 0;
    out.pending_remaining = 0.0;
    if (theta1 != theta2) {
        const int survivor = theta1 > theta2 ? 1 : 2;
        const double rest = std::max(theta1, theta2) - theta;
        if (splice_miss || st.pending_owner == survivor) {
            out.pending_owner = survivor;
            out.pending_remaining = rest;
        }
    }
    out.coupled = st.coupled || (out.z1 == out.z2);
    return out;
}

double coupling_time(const Model& m, SystemState a, SystemState b, Rng& rng, long event_cap) {
    PairedState st{a, b, a == b, 0.0};
    if (st.coupled) return 0.0;
    for (long e = 0; e < event_cap; ++e) {
        st = step_paired(m, st, rng);
        if (st.coupled) return st.clock;
    }
    fail("CapExceeded",
         "pair did not merge within " + std::to_string(event_cap) + " events");
}

CouplingStats run_coupling(const Model& m, SystemState a, SystemState b, long n_runs,
                           double alpha, std::uint64_t root_seed, long event_cap,
                           double ci_level, int threads) {
    if (n_runs < 1) fail("RangeError", "run_coupling needs n_runs >= 1");
    std::vector<double> times(static_cast<std::size_t>(n_runs), -1.0);

    int nt = threads;
    if (nt <= 0) nt = static_cast<int>(std::thread::hardware_concurrency());
    if (nt < 1) nt = 1;
    nt = static_cast<int>(std::min<long>(nt, n_runs));

    auto worker = [&](long i0, long i1) {
        for (long i = i0; i < i1; ++i) {
            Rng rng = Rng::stream(root_seed, rngdom::couple, static_cast<std::uint64_t>(i));
            try {
                times[static_cast<std::size_t>(i)] = coupling_time(m, a, b, rng, event_cap);
            } catch (const Error& e) {
                if (e.code() != "CapExceeded") throw;
                times[static_cast<std::size_t>(i)] = -1.0; // flagged, not truncated
            }
        }
    };
    if (nt == 1) {
        worker(0, n_runs);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_runs + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const long i0 = t * chunk;
            const long i1 = std::min<long>(n_runs, i0 + chunk);
            if (i0 < i1) pool.emplace_back(worker, i0, i1);
        }
        for (auto& th : pool) th.join();
    }

    CouplingStats cs;
    cs.alpha = alpha;
    cs.n_runs = n_runs;
    cs.ci_level = ci_level;
    cs.seed = root_seed;
    std::vector<double> moments;
    moments.reserve(times.size());
    for (double t : times) {
        if (t < 0.0) {
            ++cs.cap_exceeded;
            continue;
        }
        cs.meet_times.push_back(t);
        moments.push_back(std::pow(1.0 + t, alpha));
    }
    if (!moments.empty()) {
        cs.moment_mean = mean(moments);
        if (moments.size() > 1) {
            const double se = std::sqrt(sample_variance(moments) / moments.size());
            cs.moment_upper_ci = cs.moment_mean + normal_quantile(ci_level) * se;
        } else {
            cs.moment_upper_ci = cs.moment_mean;
        }
    }
    return cs;
}

namespace {

bool is_state(const SystemState& z, Regime r) { return z.regime == r && z.elapsed == 0.0; }

} // namespace

MeetRateAudit meet_rate_audit(const Model& m, const BoundParams& bp, Theta0Mode mode,
                              SystemState a, SystemState b, long n_cycles,
                              std::uint64_t root_seed, long event_cap) {
    const CouplingBound cb = coupling_q(m, bp, mode); // rejects invalid windows
    MeetRateAudit audit;
    audit.pi_bound = cb.pi_RN;
    audit.p_bound = cb.p;

    const long max_runs = std::max<long>(16 * n_cycles, 1000);
    for (long run = 0; run < max_runs && audit.cycles < n_cycles; ++run) {
        ++audit.runs;
        Rng rng = Rng::stream(root_seed, rngdom::audit, static_cast<std::uint64_t>(run));
        PairedState st{a, b, a == b, 0.0};
        if (st.coupled) continue;

        // first regenerations of both components; the later one is the
        // reference whose cycles are audited
        double first1 = -1.0, first2 = -1.0;
        bool ref_is_z1 = false;
        bool tracking = false;
        double tau_k = 0.0;
        double work_end = -1.0;   // reference's jump to repair inside the cycle
        double other_hit = -1.0;  // other component's regeneration after tau_k
        for (long e = 0; e < event_cap; ++e) {
            const PairedState nx = step_paired(m, st, rng);
            const bool z1_regen = is_state(nx.z1, Regime::Working);
            const bool z2_regen = is_state(nx.z2, Regime::Working);
            if (first1 < 0.0 && z1_regen) first1 = nx.clock;
            if (first2 < 0.0 && z2_regen) first2 = nx.clock;
            if (!tracking && first1 >= 0.0 && first2 >= 0.0) {
                tracking = true;
                ref_is_z1 = first1 > first2;
                tau_k = std::max(first1, first2);
                work_end = -1.0;
                other_hit = -1.0;
            } else if (tracking) {
                const SystemState& ref = ref_is_z1 ? nx.z1 : nx.z2;
                const SystemState& oth = ref_is_z1 ? nx.z2 : nx.z1;
                if (work_end < 0.0 && is_state(ref, Regime::Repair)) work_end = nx.clock;
                if (other_hit < 0.0 && is_state(oth, Regime::Working) && nx.clock > tau_k)
                    other_hit = nx.clock;
                const bool cycle_done = is_state(ref, Regime::Working) && nx.clock > tau_k;
                if (nx.coupled || cycle_done) {
                    ++audit.cycles;
                    const bool window =
                        work_end > 0.0 && (work_end - tau_k) > bp.R &&
                        (work_end - tau_k) < bp.N * bp.R && other_hit > 0.0 &&
                        (other_hit - tau_k) < bp.R;
                    if (window) ++audit.window_events;
                    audit.cycle_window.push_back(window);
                    audit.cycle_merged.push_back(nx.coupled);
                    if (nx.coupled) {
                        ++audit.merges;
                        break;
                    }
                    tau_k = nx.clock;
                    work_end = -1.0;
                    other_hit = -1.0;
                    if (audit.cycles >= n_cycles) break;
                }
            }
            st = nx;
            if (st.coupled) break;
        }
    }
    if (audit.cycles > 0) {
        audit.window_freq = static_cast<double>(audit.window_events) / audit.cycles;
        audit.merge_freq = static_cast<double>(audit.merges) / audit.cycles;
    }
    return audit;
}

PairedPeriodSamples collect_paired_periods(const Model& m, SystemState a, SystemState b,
                                           long n_periods, std::uint64_t root_seed,
                                           long events_per_run) {
    PairedPeriodSamples out;
    out.work.reserve(static_cast<std::size_t>(n_periods));
    out.repair.reserve(static_cast<std::size_t>(n_periods));
    const long max_runs = std::max<long>(64, 8 * n_periods / std::max<long>(1, events_per_run) + 64);
    for (long run = 0; run < max_runs; ++run) {
        if (static_cast<long>(out.work.size()) >= n_periods &&
            static_cast<long>(out.repair.size()) >= n_periods)
            break;
        Rng rng = Rng::stream(root_seed, rngdom::pair_draw, static_cast<std::uint64_t>(run));
        PairedState st{a, b, a == b, 0.0};
        // component 1 period bookkeeping; the first (residual) period is skipped
        double last_switch = 0.0;
        Regime period_regime = a.regime;
        bool first_period = true;
        for (long e = 0; e < events_per_run; ++e) {
            st = step_paired(m, st, rng);
            if (st.z1.elapsed == 0.0) { // component 1 jumped
                if (!first_period) {
                    const double len = st.clock - last_switch;
                    if (period_regime == Regime::Working)
                        out.work.push_back(len);
                    else
                        out.repair.push_back(len);
                }
                first_period = false;
                last_switch = st.clock;
                period_regime = st.z1.regime;
            }
        }
    }
    if (static_cast<long>(out.work.size()) > n_periods) out.work.resize(n_periods);
    if (static_cast<long>(out.repair.size()) > n_periods) out.repair.resize(n_periods);
    return out;
}

} // namespace availbound
