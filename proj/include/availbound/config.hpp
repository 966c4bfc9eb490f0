#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "availbound/bound.hpp"
#include "availbound/model.hpp"

namespace availbound {

// Flat dotted key/value run configuration (model.K1 = 4, sim.seed = 1, ...).
struct RunConfig {
    ModelParams model;

    double alpha = 2.0;
    Theta0Mode theta0_mode = Theta0Mode::Bracket;
    bool search = false;
    BoundParams bound; // R, N when search is off
    WindowSearchSpec search_spec;
    BoundTolerances tolerances;

    long n_traj = 0;
    std::vector<double> grid;
    double ci_level = 0.99;
    std::uint64_t seed = 0;
    SystemState x0;

    long couple_runs = 10000;
    SystemState couple_x0a{Regime::Working, 0.0};
    SystemState couple_x0b{Regime::Repair, 0.0};
    long event_cap = 10000000;
    long ks_draws = 100000;
    long ks_cycles = 100000;
    double ks_x = 0.0;
    double ks_y = 1.0;

    std::string out_dir = "out";
    bool out_json = true;
    bool out_csv = true;

    std::string raw_text; // exact file contents, hashed into the manifest
};

// Parses and validates a config file. Referenced CSVs are loaded into the
// model grids here. Throws Error("ConfigError") on structural problems.
RunConfig load_config(const std::string& path);

// Two-column numeric CSV (comma or whitespace separated, '#' comments).
std::vector<std::pair<double, double>> load_two_column_csv(const std::string& path);

} // namespace availbound
