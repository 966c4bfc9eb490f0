#include "availbound/renewal.hpp"

#include <algorithm>
#include <thread>

#include "availbound/errors.hpp"
#include "availbound/stats.hpp"

namespace availbound {

void simulate_into(const Model& m, SystemState x0, double horizon, Rng& rng,
                   std::vector<TrajectoryEvent>& out) {
    out.clear();
    Regime reg = x0.regime;
    double t = m.sample_residual(reg, x0.elapsed, rng);
    while (t <= horizon) {
        reg = other(reg);
        out.push_back({t, reg});
        t += m.sample(reg, rng);
    }
}

std::vector<TrajectoryEvent> simulate_trajectory(const Model& m, SystemState x0, double horizon,
                                                 Rng& rng) {
    if (!(horizon > 0.0)) fail("RangeError", "horizon must be positive");
    std::vector<TrajectoryEvent> out;
    simulate_into(m, x0, horizon, rng, out);
    return out;
}

Regime regime_at(const std::vector<TrajectoryEvent>& events, Regime start, double t) {
    Regime reg = start;
    for (const auto& ev : events) {
        if (ev.switch_time > t) break;
        reg = ev.new_regime;
    }
    return reg;
}

namespace {

void check_grid(const std::vector<double>& grid) {
    if (grid.empty()) fail("RangeError", "time grid must be nonempty");
    if (grid.front() < 0.0) fail("RangeError", "time grid must be nonnegative");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            fail("RangeError", "time grid must be strictly increasing");
}

AvailabilityCurve estimate_curve(const Model& m, const SystemState* fixed_x0,
                                 std::vector<double> grid, long n_traj,
                                 std::uint64_t root_seed, double ci_level, int threads,
                                 std::uint64_t domain) {
    check_grid(grid);
    if (n_traj < 100) fail("RangeError", "need at least 100 trajectories");

    int nt = threads;
    if (nt <= 0) nt = static_cast<int>(std::thread::hardware_concurrency());
    if (nt < 1) nt = 1;
    nt = static_cast<int>(std::min<long>(nt, n_traj));

    const double horizon = grid.back() + 1e-12;
    std::vector<std::vector<long>> counts(static_cast<std::size_t>(nt),
                                          std::vector<long>(grid.size(), 0));

    auto worker = [&](int slot, long i0, long i1) {
        std::vector<TrajectoryEvent> ev;
        auto& c = counts[static_cast<std::size_t>(slot)];
        for (long i = i0; i < i1; ++i) {
            Rng rng = Rng::stream(root_seed, domain, static_cast<std::uint64_t>(i));
            const SystemState start = fixed_x0 ? *fixed_x0 : m.equilibrium_sample(rng);
            simulate_into(m, start, horizon, rng, ev);
            Regime reg = start.regime;
            std::size_t e = 0;
            for (std::size_t g = 0; g < grid.size(); ++g) {
                while (e < ev.size() && ev[e].switch_time <= grid[g]) {
                    reg = ev[e].new_regime;
                    ++e;
                }
                if (reg == Regime::Working) ++c[g];
            }
        }
    };

    if (nt == 1) {
        worker(0, 0, n_traj);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_traj + nt - 1) / nt;
        for (int t = 0; t < nt; ++t) {
            const long i0 = t * chunk;
            const long i1 = std::min<long>(n_traj, i0 + chunk);
            if (i0 < i1) pool.emplace_back(worker, t, i0, i1);
        }
        for (auto& th : pool) th.join();
    }

    AvailabilityCurve curve;
    curve.grid = std::move(grid);
    curve.n_traj = n_traj;
    curve.ci_level = ci_level;
    curve.seed = root_seed;
    curve.a_hat.resize(curve.grid.size());
    curve.ci_half_width.resize(curve.grid.size());
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        long total = 0;
        for (const auto& c : counts) total += c[g];
        curve.a_hat[g] = static_cast<double>(total) / static_cast<double>(n_traj);
        curve.ci_half_width[g] = wilson_interval(total, n_traj, ci_level).half_width;
    }
    return curve;
}

} // namespace

AvailabilityCurve availability_curve(const Model& m, SystemState x0, std::vector<double> grid,
                                     long n_traj, std::uint64_t root_seed, double ci_level,
                                     int threads) {
    return estimate_curve(m, &x0, std::move(grid), n_traj, root_seed, ci_level, threads,
                          rngdom::simulate);
}

AvailabilityCurve stationary_start_curve(const Model& m, std::vector<double> grid, long n_traj,
                                         std::uint64_t root_seed, double ci_level, int threads) {
    return estimate_curve(m, nullptr, std::move(grid), n_traj, root_seed, ci_level, threads,
                          rngdom::stationary);
}

} // namespace availbound
