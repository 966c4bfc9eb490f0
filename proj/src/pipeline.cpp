#include "availbound/pipeline.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "availbound/errors.hpp"
#include "availbound/stats.hpp"

namespace availbound {

namespace {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

nlohmann::json curve_json(const AvailabilityCurve& c) {
    nlohmann::json j;
    j["n_traj"] = c.n_traj;
    j["ci_level"] = c.ci_level;
    j["seed"] = c.seed;
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        pts.push_back({{"t", c.grid[i]},
                       {"a_hat", c.a_hat[i]},
                       {"ci_lo", std::max(0.0, c.a_hat[i] - c.ci_half_width[i])},
                       {"ci_hi", std::min(1.0, c.a_hat[i] + c.ci_half_width[i])},
                       {"ci_half_width", c.ci_half_width[i]}});
    }
    j["points"] = pts;
    return j;
}

std::string curve_csv(const AvailabilityCurve& c) {
    std::string out = "t,a_hat,ci_lo,ci_hi\n";
    for (std::size_t i = 0; i < c.grid.size(); ++i) {
        out += format_double(c.grid[i]) + "," + format_double(c.a_hat[i]) + "," +
               format_double(std::max(0.0, c.a_hat[i] - c.ci_half_width[i])) + "," +
               format_double(std::min(1.0, c.a_hat[i] + c.ci_half_width[i])) + "\n";
    }
    return out;
}

// Collects written files and emits the manifest at the end.
class ArtifactWriter {
public:
    ArtifactWriter(const RunConfig& cfg, std::string command, std::string out_dir)
        : cfg_(cfg), command_(std::move(command)), dir_(std::move(out_dir)) {
        std::filesystem::create_directories(dir_);
    }

    void write(const std::string& name, const std::string& bytes) {
        const std::string path = dir_ + "/" + name;
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("IoError", "cannot write " + path);
        out << bytes;
        files_.push_back({name, bytes});
    }

    void write_json(const std::string& name, const nlohmann::json& j) {
        write(name, j.dump(2) + "\n");
    }

    void finish() {
        nlohmann::json m;
        m["command"] = command_;
        m["version"] = kVersion;
        m["seed"] = cfg_.seed;
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(cfg_.raw_text));
        m["config_hash"] = buf;
        nlohmann::json fl = nlohmann::json::array();
        std::sort(files_.begin(), files_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [name, bytes] : files_) {
            std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a64(bytes));
            fl.push_back({{"name", name}, {"hash", buf}});
        }
        m["files"] = fl;
        const std::string path = dir_ + "/manifest.json";
        std::ofstream out(path, std::ios::binary);
        if (!out) fail("IoError", "cannot write " + path);
        out << m.dump(2) << "\n";
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    std::string dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

BoundReport compute_bound(const RunConfig& cfg, nlohmann::json* search_info) {
    const Model model = Model::validate(cfg.model);
    if (cfg.search) {
        const WindowResult wr =
            optimize_window(model, cfg.alpha, cfg.x0, cfg.search_spec, cfg.theta0_mode,
                            cfg.tolerances);
        if (search_info) {
            (*search_info)["cells_examined"] = wr.cells_examined;
            (*search_info)["cells_feasible"] = wr.cells_feasible;
        }
        return wr.report;
    }
    return psi_bound(model, cfg.alpha, cfg.x0, cfg.bound, cfg.theta0_mode, cfg.tolerances);
}

} // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

VerifyPoint verify_point(double t, double a_hat, double half_width, double availability,
                         double psi, double alpha) {
    VerifyPoint p;
    p.t = t;
    p.a_hat = a_hat;
    p.half_width = half_width;
    p.discrepancy = std::fabs(a_hat - availability);
    p.adjusted = std::max(0.0, p.discrepancy - half_width);
    p.bound = psi / std::pow(1.0 + t, alpha);
    p.pass = p.adjusted <= p.bound;
    return p;
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json j;
    j["bound"] = bound.to_json();
    j["availability"] = availability;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points) {
        pts.push_back({{"t", p.t},
                       {"a_hat", p.a_hat},
                       {"ci_half_width", p.half_width},
                       {"discrepancy", p.discrepancy},
                       {"ci_adjusted_discrepancy", p.adjusted},
                       {"bound", p.bound},
                       {"pass", p.pass}});
    }
    j["points"] = pts;
    j["points_pass"] = points_pass;
    j["coupling"] = {{"runs", coupling_runs},
                     {"cap_exceeded", cap_exceeded},
                     {"moment_upper_ci", moment_upper_ci},
                     {"moment_constant", moment_constant},
                     {"pass", coupling_pass}};
    nlohmann::json ksj = nlohmann::json::array();
    for (const auto& k : ks)
        ksj.push_back({{"name", k.name},
                       {"statistic", k.statistic},
                       {"p_value", k.p_value},
                       {"n", k.n},
                       {"pass", k.pass}});
    j["ks_suite"] = ksj;
    j["ks_pass"] = ks_pass;
    j["overall_pass"] = overall_pass;
    // note: per-point verdicts subtract the Wilson half-width, so Monte
    // Carlo noise cannot produce spurious failures.
    j["discrepancy_rule"] = "ci_adjusted";
    return j;
}

VerifyReport run_verify(const RunConfig& cfg, int threads) {
    VerifyReport r;
    r.bound = compute_bound(cfg, nullptr);

    const Model model = Model::validate(cfg.model);
    r.availability = model.limiting_availability();

    const AvailabilityCurve curve = availability_curve(model, cfg.x0, cfg.grid, cfg.n_traj,
                                                       cfg.seed, cfg.ci_level, threads);
    r.points_pass = true;
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        const VerifyPoint p = verify_point(curve.grid[i], curve.a_hat[i],
                                           curve.ci_half_width[i], r.availability,
                                           r.bound.psi, r.bound.alpha);
        r.points_pass = r.points_pass && p.pass;
        r.points.push_back(p);
    }

    const BoundParams used{r.bound.alpha, r.bound.R, r.bound.N};
    const CouplingStats cs =
        run_coupling(model, cfg.couple_x0a, cfg.couple_x0b, cfg.couple_runs, cfg.alpha,
                     cfg.seed, cfg.event_cap, cfg.ci_level, threads);
    r.coupling_runs = cs.n_runs;
    r.cap_exceeded = cs.cap_exceeded;
    r.moment_upper_ci = cs.moment_upper_ci;
    r.moment_constant = coupling_moment_constant(model, cfg.alpha, cfg.couple_x0a,
                                                 cfg.couple_x0b, used, cfg.theta0_mode,
                                                 cfg.tolerances);
    r.coupling_pass = cs.cap_exceeded == 0 && cs.moment_upper_ci <= r.moment_constant;

    // marginal KS suite
    auto add_ks = [&r](const std::string& name, const KsResult& k, long n) {
        VerifyReport::KsEntry e;
        e.name = name;
        e.statistic = k.statistic;
        e.p_value = k.p_value;
        e.n = n;
        e.pass = k.p_value > 0.01;
        r.ks.push_back(e);
    };
    {
        std::vector<double> tx, ty;
        tx.reserve(cfg.ks_draws);
        ty.reserve(cfg.ks_draws);
        Rng rng = Rng::stream(cfg.seed, rngdom::pair_draw, 0xC0FFEE);
        for (long i = 0; i < cfg.ks_draws; ++i) {
            const CoupledDraw d = sample_coupled_pair(model, cfg.ks_x, cfg.ks_y, rng);
            tx.push_back(d.theta_x);
            ty.push_back(d.theta_y);
        }
        auto cdf_x = [&model, &cfg](double s) {
            return model.residual_cdf(Regime::Working, cfg.ks_x, s);
        };
        auto cdf_y = [&model, &cfg](double s) {
            return model.residual_cdf(Regime::Working, cfg.ks_y, s);
        };
        add_ks("coupled_theta_x", ks_test(std::move(tx), cdf_x), cfg.ks_draws);
        add_ks("coupled_theta_y", ks_test(std::move(ty), cdf_y), cfg.ks_draws);
    }
    {
        const PairedPeriodSamples ps = collect_paired_periods(
            model, cfg.couple_x0a, cfg.couple_x0b, cfg.ks_cycles, cfg.seed);
        auto f1 = [&model](double s) { return model.cdf(Regime::Working, s); };
        auto f2 = [&model](double s) { return model.cdf(Regime::Repair, s); };
        add_ks("paired_work_periods", ks_test(ps.work, f1), static_cast<long>(ps.work.size()));
        add_ks("paired_repair_periods", ks_test(ps.repair, f2),
               static_cast<long>(ps.repair.size()));
    }
    r.ks_pass = true;
    for (const auto& k : r.ks) r.ks_pass = r.ks_pass && k.pass;

    r.overall_pass = r.points_pass && r.coupling_pass && r.ks_pass;
    return r;
}

int cmd_bound(const RunConfig& cfg, const std::string& out_dir, int /*threads*/) {
    nlohmann::json search_info;
    const BoundReport rep = compute_bound(cfg, &search_info);
    nlohmann::json j = rep.to_json();
    if (cfg.search) j["search"] = search_info;
    ArtifactWriter w(cfg, "bound", out_dir);
    w.write_json("bound_report.json", j);
    w.finish();
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const Model model = Model::validate(cfg.model);
    const AvailabilityCurve curve = availability_curve(model, cfg.x0, cfg.grid, cfg.n_traj,
                                                       cfg.seed, cfg.ci_level, threads);
    ArtifactWriter w(cfg, "simulate", out_dir);
    if (cfg.out_csv) w.write("availability.csv", curve_csv(curve));
    if (cfg.out_json) w.write_json("availability.json", curve_json(curve));
    w.finish();
    return 0;
}

int cmd_stationary(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const Model model = Model::validate(cfg.model);
    const AvailabilityCurve curve =
        stationary_start_curve(model, cfg.grid, cfg.n_traj, cfg.seed, cfg.ci_level, threads);
    ArtifactWriter w(cfg, "stationary", out_dir);
    if (cfg.out_csv) w.write("stationary.csv", curve_csv(curve));
    if (cfg.out_json) {
        nlohmann::json j = curve_json(curve);
        j["availability"] = model.limiting_availability();
        w.write_json("stationary.json", j);
    }
    w.finish();
    return 0;
}

int cmd_couple(const RunConfig& cfg, const std::string& out_dir, int threads) {
    const Model model = Model::validate(cfg.model);
    const CouplingStats cs =
        run_coupling(model, cfg.couple_x0a, cfg.couple_x0b, cfg.couple_runs, cfg.alpha,
                     cfg.seed, cfg.event_cap, cfg.ci_level, threads);
    nlohmann::json j;
    j["alpha"] = cs.alpha;
    j["n_runs"] = cs.n_runs;
    j["cap_exceeded"] = cs.cap_exceeded;
    j["moment_mean"] = cs.moment_mean;
    j["moment_upper_ci"] = cs.moment_upper_ci;
    j["ci_level"] = cs.ci_level;
    j["seed"] = cs.seed;
    if (!cs.meet_times.empty()) {
        j["meet_time_mean"] = mean(cs.meet_times);
        j["meet_time_max"] = *std::max_element(cs.meet_times.begin(), cs.meet_times.end());
    }
    ArtifactWriter w(cfg, "couple", out_dir);
    w.write_json("coupling.json", j);
    if (cfg.out_csv) {
        std::string csv = "meet_time\n";
        for (double t : cs.meet_times) csv += format_double(t) + "\n";
        w.write("meet_times.csv", csv);
    }
    w.finish();
    if (cs.cap_exceeded > 0) {
        std::cerr << "error: CapExceeded: " << cs.cap_exceeded
                  << " coupling runs hit the event cap\n";
        return 1;
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& out_dir, int threads, bool quiet) {
    const VerifyReport r = run_verify(cfg, threads);
    ArtifactWriter w(cfg, "verify", out_dir);
    w.write_json("bound_report.json", r.bound.to_json());
    w.write_json("verify.json", r.to_json());
    w.finish();
    if (!quiet) {
        for (const auto& p : r.points)
            std::cout << (p.pass ? "PASS" : "FAIL") << " t=" << p.t
                      << " ci_adjusted=" << p.adjusted << " bound=" << p.bound << "\n";
        std::cout << (r.coupling_pass ? "PASS" : "FAIL") << " coupling moment: upper CI "
                  << r.moment_upper_ci << " vs constant " << r.moment_constant << "\n";
        for (const auto& k : r.ks)
            std::cout << (k.pass ? "PASS" : "FAIL") << " ks " << k.name << " p=" << k.p_value
                      << "\n";
        std::cout << (r.overall_pass ? "PASS" : "FAIL") << " overall\n";
    }
    if (!r.overall_pass) {
        std::string failing;
        for (const auto& p : r.points)
            if (!p.pass) failing += (failing.empty() ? "" : ", ") + format_double(p.t);
        if (!failing.empty())
            std::cerr << "error: VerificationFailed: bound violated at t = " << failing << "\n";
        else
            std::cerr << "error: VerificationFailed: coupling or KS check failed\n";
        return 1;
    }
    return 0;
}

} // namespace availbound
