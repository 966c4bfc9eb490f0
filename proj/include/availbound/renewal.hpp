#pragma once

#include <cstdint>
#include <vector>

#include "availbound/model.hpp"

namespace availbound {

struct TrajectoryEvent {
    double switch_time = 0.0;
    Regime new_regime = Regime::Working;
};

// Event-driven realization of the alternating process up to `horizon`.
// The first period is drawn from the residual law of x0, later periods are
// i.i.d. from the regime laws; switch times strictly increase and regimes
// alternate. Trajectories are right continuous: at a switch time the regime
// is already the new one.
void simulate_into(const Model& m, SystemState x0, double horizon, Rng& rng,
                   std::vector<TrajectoryEvent>& out);
std::vector<TrajectoryEvent> simulate_trajectory(const Model& m, SystemState x0, double horizon,
                                                 Rng& rng);

Regime regime_at(const std::vector<TrajectoryEvent>& events, Regime start, double t);

struct AvailabilityCurve {
    std::vector<double> grid;
    std::vector<double> a_hat;
    std::vector<double> ci_half_width; // Wilson, two-sided at ci_level
    long n_traj = 0;
    double ci_level = 0.99;
    std::uint64_t seed = 0;
};

// Pointwise availability estimate over the grid. Common random numbers:
// each trajectory is evaluated at every grid point.
AvailabilityCurve availability_curve(const Model& m, SystemState x0, std::vector<double> grid,
                                     long n_traj, std::uint64_t root_seed,
                                     double ci_level = 0.99, int threads = 1);

// Same estimator with every trajectory started from an independent draw of
// the stationary law; the curve should be flat at the limiting availability.
AvailabilityCurve stationary_start_curve(const Model& m, std::vector<double> grid, long n_traj,
                                         std::uint64_t root_seed, double ci_level = 0.99,
                                         int threads = 1);

} // namespace availbound
