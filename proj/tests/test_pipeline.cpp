#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "availbound/errors.hpp"
#include "availbound/pipeline.hpp"

using namespace availbound;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_temp_config(const std::string& name, const std::string& body) {
    const fs::path dir = fs::temp_directory_path() / "availbound_tests";
    fs::create_directories(dir);
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << body;
    return p;
}

// small, fast variant of the canonical run
std::string small_config(const std::string& extra = "") {
    return "model.K1 = 4\n"
           "model.K2 = 4\n"
           "model.Lambda = 5\n"
           "bound.alpha = 2\n"
           "bound.theta0_mode = exact\n"
           "bound.R = 1\n"
           "bound.N = 3\n"
           "sim.n_traj = 3000\n"
           "sim.grid = 0,0.5,1,2,5,10\n"
           "sim.seed = 4242\n"
           "sim.x0 = 1:0\n"
           "couple.n_runs = 400\n"
           "couple.event_cap = 1000000\n"
           "couple.ks_draws = 4000\n"
           "couple.ks_cycles = 4000\n" +
           extra;
}

} // namespace

TEST_CASE("config parsing and validation") {
    const fs::path p = write_temp_config("ok.conf", small_config());
    const RunConfig cfg = load_config(p.string());
    CHECK(cfg.model.k1 == 4.0);
    CHECK(cfg.alpha == 2.0);
    CHECK(cfg.theta0_mode == Theta0Mode::Exact);
    CHECK(cfg.seed == 4242);
    CHECK(cfg.grid.size() == 6);
    CHECK(cfg.x0.regime == Regime::Working);

    const fs::path noseed = write_temp_config(
        "noseed.conf", "model.K1 = 4\nmodel.K2 = 4\nmodel.Lambda = 5\nbound.alpha = 2\n"
                       "bound.R = 1\nbound.N = 3\n");
    CHECK_THROWS_WITH_AS(load_config(noseed.string()), doctest::Contains("sim.seed"), Error);

    const fs::path badgrid = write_temp_config(
        "badgrid.conf", small_config("sim.grid = 0,1,1\n"));
    CHECK_THROWS_WITH_AS(load_config(badgrid.string()),
                         doctest::Contains("strictly increasing"), Error);

    const fs::path badcsv = write_temp_config(
        "badcsv.conf",
        small_config("model.work_family = tabulated_hazard\n"
                     "model.work_hazard_csv = /nonexistent/h.csv\n"));
    CHECK_THROWS_WITH_AS(load_config(badcsv.string()), doctest::Contains("ConfigError"), Error);
}

TEST_CASE("bound command writes a complete report") {
    const fs::path p = write_temp_config("bound.conf", small_config());
    const RunConfig cfg = load_config(p.string());
    const fs::path out = fs::temp_directory_path() / "availbound_tests" / "bound_out";
    fs::remove_all(out);
    CHECK(cmd_bound(cfg, out.string(), 1) == 0);

    const auto j = nlohmann::json::parse(slurp(out / "bound_report.json"));
    CHECK(j["q"].get<double>() > 0.0);
    CHECK(j["q"].get<double>() < 1.0);
    CHECK(std::isfinite(j["psi"].get<double>()));
    for (const char* key : {"theta0", "kappa_NR", "pi_RN", "p", "M1_alpha", "M2_alpha",
                            "series_factor", "bracket_b", "psi_derivation_tight"})
        CHECK(j.contains(key));

    // manifest lists every artifact with its content hash
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["files"].size() == 1);
    CHECK(manifest["files"][0]["name"] == "bound_report.json");
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(slurp(out / "bound_report.json"))));
    CHECK(manifest["files"][0]["hash"] == std::string(buf));
}

TEST_CASE("simulate command writes the curve in both formats") {
    const fs::path p = write_temp_config("sim.conf", small_config());
    const RunConfig cfg = load_config(p.string());
    const fs::path out = fs::temp_directory_path() / "availbound_tests" / "sim_out";
    fs::remove_all(out);
    CHECK(cmd_simulate(cfg, out.string(), 2) == 0);

    std::istringstream csv(slurp(out / "availability.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,a_hat,ci_lo,ci_hi");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 6);

    const auto j = nlohmann::json::parse(slurp(out / "availability.json"));
    CHECK(j["points"].size() == 6);
    CHECK(j["points"][0]["a_hat"].get<double>() == 1.0); // starts working
}

TEST_CASE("verify pipeline passes on the canonical model and is deterministic") {
    const fs::path p = write_temp_config("verify.conf", small_config());
    const RunConfig cfg = load_config(p.string());
    const fs::path out1 = fs::temp_directory_path() / "availbound_tests" / "verify1";
    const fs::path out2 = fs::temp_directory_path() / "availbound_tests" / "verify2";
    fs::remove_all(out1);
    fs::remove_all(out2);
    CHECK(cmd_verify(cfg, out1.string(), 2, true) == 0);
    CHECK(cmd_verify(cfg, out2.string(), 1, true) == 0); // thread count must not matter

    for (const char* name : {"verify.json", "bound_report.json", "manifest.json"})
        CHECK(slurp(out1 / name) == slurp(out2 / name));

    const auto j = nlohmann::json::parse(slurp(out1 / "verify.json"));
    CHECK(j["overall_pass"].get<bool>());
    CHECK(j["points"].size() == 6);
    CHECK(j["discrepancy_rule"] == "ci_adjusted");
}

TEST_CASE("the comparator flags a bound that is too small") {
    // a_hat(0) = 1 vs A = 1/2: any bound below ~0.5 must fail
    const VerifyPoint p = verify_point(0.0, 1.0, 0.005, 0.5, 1e-3, 2.0);
    CHECK_FALSE(p.pass);
    CHECK(p.adjusted == doctest::Approx(0.495));
    const VerifyPoint ok = verify_point(0.0, 1.0, 0.005, 0.5, 10.0, 2.0);
    CHECK(ok.pass);
}

TEST_CASE("CLI end to end: exit codes and artifacts") {
    const fs::path p = write_temp_config("cli.conf", small_config());
    const fs::path out = fs::temp_directory_path() / "availbound_tests" / "cli_out";
    fs::remove_all(out);
    const std::string base = std::string(AVAIL_BOUND_BIN);

    std::string cmd = base + " bound --config " + p.string() + " --out " + out.string() +
                      " > /dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(out / "bound_report.json"));
    CHECK(fs::exists(out / "manifest.json"));

    // alpha outside (1, K-1) must be refused with a named violation
    const fs::path bad = write_temp_config(
        "cli_bad.conf", small_config("bound.alpha = 3\n"));
    const fs::path errfile = fs::temp_directory_path() / "availbound_tests" / "stderr.txt";
    cmd = base + " bound --config " + bad.string() + " --out " + out.string() + " 2> " +
          errfile.string() + " > /dev/null";
    CHECK(std::system(cmd.c_str()) != 0);
    CHECK(slurp(errfile).find("AlphaOutOfRange") != std::string::npos);

    // the shipped canonical config parses
    const std::string canonical =
        std::string(AVAIL_BOUND_CONFIG_DIR) + "/canonical.conf";
    CHECK(fs::exists(canonical));
    const RunConfig cfg = load_config(canonical);
    CHECK(cfg.seed == 424242);
}

TEST_CASE("couple and stationary commands write their artifacts") {
    const fs::path p = write_temp_config("couple.conf", small_config());
    const RunConfig cfg = load_config(p.string());
    const fs::path out = fs::temp_directory_path() / "availbound_tests" / "couple_out";
    fs::remove_all(out);
    CHECK(cmd_couple(cfg, out.string(), 2) == 0);
    const auto cj = nlohmann::json::parse(slurp(out / "coupling.json"));
    CHECK(cj["n_runs"] == 400);
    CHECK(cj["cap_exceeded"] == 0);
    CHECK(cj["moment_mean"].get<double>() >= 1.0);
    std::istringstream csv(slurp(out / "meet_times.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "meet_time");
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 400);

    const fs::path sout = fs::temp_directory_path() / "availbound_tests" / "stat_out";
    fs::remove_all(sout);
    CHECK(cmd_stationary(cfg, sout.string(), 2) == 0);
    const auto sj = nlohmann::json::parse(slurp(sout / "stationary.json"));
    CHECK(sj["availability"].get<double>() == 0.5);
    CHECK(sj["points"].size() == 6);
    // flat at A: t = 0 already sits at the limit
    CHECK(std::fabs(sj["points"][0]["a_hat"].get<double>() - 0.5) <
          3.0 * sj["points"][0]["ci_half_width"].get<double>());
}

TEST_CASE("tabulated laws load from CSV through the config") {
    const fs::path dir = fs::temp_directory_path() / "availbound_tests";
    fs::create_directories(dir);
    const fs::path csv = dir / "hazard.csv";
    {
        std::ofstream out(csv);
        out.precision(17);
        out << "# s, lambda\n";
        for (int i = 0; i <= 40; ++i) {
            const double s = i * 0.5;
            out << s << "," << 4.0 / (1.0 + s) * (1.0 + 1e-9) << "\n";
        }
    }
    const fs::path p = write_temp_config(
        "tab.conf", small_config("model.work_family = tabulated_hazard\n"
                                 "model.work_hazard_csv = " + csv.string() + "\n"));
    const RunConfig cfg = load_config(p.string());
    const Model m = Model::validate(cfg.model);
    CHECK(m.hazard(0.0) == doctest::Approx(4.0));
    CHECK(m.mean_work() == doctest::Approx(1.0 / 3.0).epsilon(0.02));
}

TEST_CASE("window search through the config surface") {
    const fs::path p = write_temp_config(
        "search.conf", small_config("bound.search = true\n"
                                    "bound.search.r_max = 2\n"
                                    "bound.search.r_points = 12\n"
                                    "bound.search.n_max = 8\n"
                                    "bound.search.refine_passes = 1\n"));
    const RunConfig cfg = load_config(p.string());
    const fs::path out = fs::temp_directory_path() / "availbound_tests" / "search_out";
    fs::remove_all(out);
    CHECK(cmd_bound(cfg, out.string(), 1) == 0);
    const auto j = nlohmann::json::parse(slurp(out / "bound_report.json"));
    CHECK(j.contains("search"));
    CHECK(std::isfinite(j["psi"].get<double>()));
}
