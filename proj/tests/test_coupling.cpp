#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "availbound/coupling.hpp"
#include "availbound/errors.hpp"
#include "availbound/numerics.hpp"
#include "availbound/renewal.hpp"
#include "availbound/stats.hpp"
#include "oracles.hpp"

using namespace availbound;

namespace {
const Model& canonical() {
    static const Model m = make_pareto_model(4.0, 4.0, 5.0);
    return m;
}
const BoundParams kWindow{2.0, 1.0, 3.0};
const SystemState kW0{Regime::Working, 0.0};
const SystemState kR0{Regime::Repair, 0.0};
} // namespace

TEST_CASE("min-density kit: identical elapsed times") {
    const MinDensityKit kit(canonical(), 1.5, 1.5);
    CHECK(kit.kappa_xy() == 1.0);
    for (double s : {0.1, 1.0, 4.0})
        CHECK(kit.Phi(s) ==
              doctest::Approx(canonical().residual_cdf(Regime::Working, 1.5, s)).epsilon(1e-12));
    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const CoupledDraw d = sample_coupled_pair(canonical(), 1.5, 1.5, rng);
        CHECK(d.equal);
        CHECK(d.theta_x == d.theta_y);
    }
}

TEST_CASE("min-density kit: splice decomposition and quadrature cross-checks") {
    for (auto [x, y] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {2.0, 5.0}, {4.0, 0.5}}) {
        const MinDensityKit kit(canonical(), x, y);
        // Phi + Phi_hat reassembles the x-marginal
        for (double s : {0.05, 0.3, 1.0, 2.5, 8.0, 40.0}) {
            const double lhs = kit.Phi(s) + kit.Phi_hat(s);
            CHECK(lhs == doctest::Approx(canonical().residual_cdf(Regime::Working, x, s))
                             .epsilon(1e-10));
            // min of densities, resolved by the crossing analysis
            CHECK(kit.phi(s) ==
                  doctest::Approx(std::min(canonical().residual_pdf_work(x, s),
                                           canonical().residual_pdf_work(y, s)))
                      .epsilon(1e-12));
        }
        // closed-form kappa against direct quadrature of the min density
        auto phi = [&kit](double s) { return kit.phi(s); };
        CHECK(kit.kappa_xy() ==
              doctest::Approx(integrate_semi_infinite(phi, 0.0).value).epsilon(1e-8));
        // and the primitive against quadrature at one interior point
        CHECK(kit.Phi(1.7) == doctest::Approx(integrate_finite(phi, 0.0, 1.7).value).epsilon(1e-8));
    }
}

TEST_CASE("kappa_xy dominates kappa(max(x,y)) on a grid") {
    for (double x : {0.0, 0.7, 2.0, 5.0})
        for (double y : {0.0, 0.7, 2.0, 5.0}) {
            const MinDensityKit kit(canonical(), x, y);
            CHECK(kit.kappa_xy() >= kappa(canonical(), std::max(x, y)) - 1e-9);
        }
}

TEST_CASE("coupled pair: exact marginals and meet probability") {
    const double x = 0.0, y = 1.0;
    const MinDensityKit kit(canonical(), x, y);
    std::vector<double> tx, ty;
    long equal = 0;
    const long n = 30000;
    Rng rng = Rng::stream(21, rngdom::test, 0);
    for (long i = 0; i < n; ++i) {
        const CoupledDraw d = sample_coupled_pair(canonical(), x, y, rng);
        tx.push_back(d.theta_x);
        ty.push_back(d.theta_y);
        if (d.equal) ++equal;
        if (d.equal) CHECK(d.theta_x == d.theta_y);
    }
    auto fx = [&](double s) { return canonical().residual_cdf(Regime::Working, x, s); };
    auto fy = [&](double s) { return canonical().residual_cdf(Regime::Working, y, s); };
    CHECK(ks_test(tx, fx).p_value > 0.01);
    CHECK(ks_test(ty, fy).p_value > 0.01);

    const double freq = static_cast<double>(equal) / n;
    const double sigma = std::sqrt(kit.kappa_xy() * (1.0 - kit.kappa_xy()) / n);
    CHECK(std::fabs(freq - kit.kappa_xy()) < 3.0 * sigma);
    CHECK(freq >= kappa(canonical(), std::max(x, y)) - 3.0 * sigma);
}

TEST_CASE("nearly identical elapsed times merge at the next event") {
    Rng rng(5);
    PairedState st{{Regime::Working, 1.0}, {Regime::Working, 1.0 + 1e-13}, false, 0.0};
    int merged = 0;
    for (int i = 0; i < 20; ++i) {
        const PairedState nx = step_paired(canonical(), st, rng);
        if (nx.coupled) ++merged;
    }
    CHECK(merged == 20); // kappa ~ 1 - O(1e-13)
}

TEST_CASE("identical states evolve identically and stay coupled") {
    Rng rng(6);
    PairedState st{{Regime::Working, 0.4}, {Regime::Working, 0.4}, true, 0.0};
    for (int i = 0; i < 30; ++i) {
        st = step_paired(canonical(), st, rng);
        CHECK(st.z1 == st.z2);
        CHECK(st.coupled);
        CHECK(st.clock > 0.0);
    }
}

TEST_CASE("absorption: the coupled flag never reverts") {
    for (int run = 0; run < 100; ++run) {
        Rng rng = Rng::stream(22, rngdom::test, run);
        PairedState st{kW0, kR0, false, 0.0};
        bool was_coupled = false;
        for (int e = 0; e < 400; ++e) {
            st = step_paired(canonical(), st, rng);
            if (was_coupled) {
                CHECK(st.coupled);
                CHECK(st.z1 == st.z2);
            }
            was_coupled = was_coupled || st.coupled;
        }
        CHECK(was_coupled); // desk-scale runs always merge
    }
}

TEST_CASE("paired runs preserve the component marginals") {
    const PairedPeriodSamples ps = collect_paired_periods(canonical(), kW0, kR0, 30000, 23);
    REQUIRE(ps.work.size() == 30000);
    REQUIRE(ps.repair.size() == 30000);
    auto f1 = [](double s) { return 1.0 - std::pow(1.0 + s, -4.0); };
    CHECK(ks_test(ps.work, f1).p_value > 0.01);
    CHECK(ks_test(ps.repair, f1).p_value > 0.01); // K2 = K1 here
}

TEST_CASE("component one of the pair matches the plain renewal process") {
    // first-period lengths against renewal-sim, two-sample
    const SystemState start{Regime::Working, 0.5};
    std::vector<double> paired_first, renewal_first;
    for (int i = 0; i < 20000; ++i) {
        Rng rng = Rng::stream(24, rngdom::test, i);
        PairedState st{start, kR0, false, 0.0};
        while (true) {
            st = step_paired(canonical(), st, rng);
            if (st.z1.elapsed == 0.0) {
                paired_first.push_back(st.clock);
                break;
            }
        }
        Rng rng2 = Rng::stream(25, rngdom::test, i);
        const auto ev = simulate_trajectory(canonical(), start, 1000.0, rng2);
        renewal_first.push_back(ev.front().switch_time);
    }
    CHECK(ks_test_two_sample(paired_first, renewal_first).p_value > 0.01);

    // regime fraction at a fixed time
    const double t = 2.0;
    long working = 0;
    const long n = 20000;
    for (long i = 0; i < n; ++i) {
        Rng rng = Rng::stream(26, rngdom::test, i);
        PairedState st{start, kR0, false, 0.0};
        Regime reg = start.regime;
        while (st.clock < t) {
            reg = st.z1.regime;
            st = step_paired(canonical(), st, rng);
        }
        if (reg == Regime::Working) ++working;
    }
    const double paired_frac = static_cast<double>(working) / n;
    const AvailabilityCurve curve =
        availability_curve(canonical(), start, {t}, n, 27, 0.99, 2);
    const double pooled =
        std::sqrt(paired_frac * (1.0 - paired_frac) / n + curve.a_hat[0] * (1.0 - curve.a_hat[0]) / n);
    CHECK(std::fabs(paired_frac - curve.a_hat[0]) < 4.0 * pooled + 1e-6);
}

TEST_CASE("coupling time: degenerate start, success, and the moment bound") {
    Rng rng(8);
    CHECK(coupling_time(canonical(), kW0, kW0, rng, 100) == 0.0);

    const CouplingStats cs = run_coupling(canonical(), kW0, kR0, 2000, 2.0, 31, 1000000, 0.99, 2);
    CHECK(cs.cap_exceeded == 0);
    CHECK(static_cast<long>(cs.meet_times.size()) == 2000);
    for (double t : cs.meet_times) CHECK(t > 0.0);
    CHECK(cs.moment_mean >= 1.0);
    const double c15 = coupling_moment_constant(canonical(), 2.0, kW0, kR0, kWindow,
                                                Theta0Mode::Exact);
    CHECK(cs.moment_upper_ci <= c15);
}

TEST_CASE("tiny event caps are flagged, never truncated") {
    Rng rng(9);
    CHECK_THROWS_WITH_AS(coupling_time(canonical(), kW0, kR0, rng, 1),
                         doctest::Contains("CapExceeded"), Error);
    const CouplingStats cs = run_coupling(canonical(), kW0, kR0, 50, 2.0, 32, 1, 0.99, 1);
    CHECK(cs.cap_exceeded == 50);
    CHECK(cs.meet_times.empty());
}

TEST_CASE("meet-rate audit beats the theoretical lower bounds") {
    const MeetRateAudit audit =
        meet_rate_audit(canonical(), kWindow, Theta0Mode::Exact, kW0, kR0, 1500, 33);
    REQUIRE(audit.cycles >= 1500);
    CHECK(static_cast<long>(audit.cycle_window.size()) == audit.cycles);
    CHECK(static_cast<long>(audit.cycle_merged.size()) == audit.cycles);
    const double sig_m =
        std::sqrt(std::max(audit.merge_freq * (1.0 - audit.merge_freq), 1e-12) / audit.cycles);
    const double sig_w =
        std::sqrt(std::max(audit.window_freq * (1.0 - audit.window_freq), 1e-12) / audit.cycles);
    CHECK(audit.merge_freq >= audit.p_bound - 3.0 * sig_m);
    CHECK(audit.window_freq >= audit.pi_bound - 3.0 * sig_w);

    // an invalid window refuses to run
    CHECK_THROWS_WITH_AS(
        meet_rate_audit(canonical(), {2.0, 0.5, 3.0}, Theta0Mode::Exact, kW0, kR0, 10, 34),
        doctest::Contains("InvalidWindow"), Error);
}

TEST_CASE("tabulated working law goes through the quadrature splice") {
    ModelParams p;
    p.k1 = 4.0;
    p.k2 = 4.0;
    p.lambda = 5.0;
    p.work_family = WorkFamily::TabulatedHazard;
    for (double s = 0.0; s <= 20.0 + 1e-9; s += 0.5) {
        p.hazard_grid.s.push_back(s);
        p.hazard_grid.lambda.push_back(4.0 / (1.0 + s));
    }
    const Model m = Model::validate(p);
    const MinDensityKit kit(m, 0.5, 1.5);
    CHECK(kit.kappa_xy() > 0.0);
    CHECK(kit.kappa_xy() < 1.0);
    CHECK(kit.kappa_xy() >= kappa(m, 1.5) - 1e-6);

    Rng rng(10);
    std::vector<double> tx;
    long equal = 0;
    const long n = 300;
    for (long i = 0; i < n; ++i) {
        const CoupledDraw d = sample_coupled_pair(m, 0.5, 1.5, rng);
        tx.push_back(d.theta_x);
        if (d.equal) ++equal;
    }
    auto fx = [&m](double s) { return m.residual_cdf(Regime::Working, 0.5, s); };
    CHECK(ks_test(tx, fx).p_value > 0.001);
    const double freq = static_cast<double>(equal) / n;
    const double sigma = std::sqrt(kit.kappa_xy() * (1.0 - kit.kappa_xy()) / n);
    CHECK(std::fabs(freq - kit.kappa_xy()) < 5.0 * sigma);
}
