#pragma once

#include <json.hpp>
#include <string>

#include "availbound/config.hpp"
#include "availbound/coupling.hpp"
#include "availbound/renewal.hpp"

namespace availbound {

inline constexpr const char* kVersion = "avail-bound 1.0.0";

struct VerifyPoint {
    double t = 0.0;
    double a_hat = 0.0;
    double half_width = 0.0;
    double discrepancy = 0.0; // |a_hat - A|
    double adjusted = 0.0;    // max(0, discrepancy - half_width)
    double bound = 0.0;       // psi / (1+t)^alpha
    bool pass = false;
};

struct VerifyReport {
    BoundReport bound;
    double availability = 0.0;
    std::vector<VerifyPoint> points;
    bool points_pass = false;
    // coupling moment check
    long coupling_runs = 0;
    long cap_exceeded = 0;
    double moment_upper_ci = 0.0;
    double moment_constant = 0.0;
    bool coupling_pass = false;
    // marginal KS suite
    struct KsEntry {
        std::string name;
        double statistic = 0.0;
        double p_value = 0.0;
        long n = 0;
        bool pass = false;
    };
    std::vector<KsEntry> ks;
    bool ks_pass = false;
    bool overall_pass = false;

    nlohmann::json to_json() const;
};

// Command bodies shared by the CLI and the test suites. Each writes its
// artifacts plus a manifest into out_dir and returns the process exit code.
int cmd_bound(const RunConfig& cfg, const std::string& out_dir, int threads);
int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, int threads);
int cmd_couple(const RunConfig& cfg, const std::string& out_dir, int threads);
int cmd_stationary(const RunConfig& cfg, const std::string& out_dir, int threads);
int cmd_verify(const RunConfig& cfg, const std::string& out_dir, int threads,
               bool quiet = false);

// The verify computation without artifact I/O.
VerifyReport run_verify(const RunConfig& cfg, int threads);

// Pure comparator behind the per-point verdicts; exposed for direct testing.
VerifyPoint verify_point(double t, double a_hat, double half_width, double availability,
                         double psi, double alpha);

std::uint64_t fnv1a64(const std::string& bytes);

} // namespace availbound
