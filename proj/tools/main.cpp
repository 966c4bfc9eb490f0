#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <string>

#include "availbound/errors.hpp"
#include "availbound/pipeline.hpp"

namespace {

struct CmdArgs {
    std::string config;
    std::string out;
    int threads = 0; // 0 = env fallback, then all hardware threads
};

int resolve_threads(int cli_value) {
    if (cli_value > 0) return cli_value;
    if (const char* env = std::getenv("AVAIL_BOUND_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0; // auto
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Availability bound calculator and Monte Carlo verifier"};
    app.require_subcommand(1);

    const std::vector<std::string> names = {"bound", "simulate", "couple", "stationary",
                                            "verify"};
    std::map<std::string, CmdArgs> args;
    for (const auto& name : names) {
        auto* sub = app.add_subcommand(name);
        auto& a = args[name];
        sub->add_option("--config", a.config, "run configuration file")->required();
        sub->add_option("--out", a.out, "output directory (overrides output.dir)");
        sub->add_option("--threads", a.threads, "worker threads (default: all cores)");
    }
    app.get_subcommand("bound")->description("compute the convergence-rate bound report");
    app.get_subcommand("simulate")->description("estimate the availability curve");
    app.get_subcommand("couple")->description("sample coupling times of the paired process");
    app.get_subcommand("stationary")->description("availability curve from stationary starts");
    app.get_subcommand("verify")->description("confront the bound with simulation");

    CLI11_PARSE(app, argc, argv);

    const std::string cmd = app.get_subcommands().front()->get_name();
    const CmdArgs& a = args[cmd];
    try {
        const availbound::RunConfig cfg = availbound::load_config(a.config);
        const std::string out_dir = a.out.empty() ? cfg.out_dir : a.out;
        const int threads = resolve_threads(a.threads);
        if (cmd == "bound") return availbound::cmd_bound(cfg, out_dir, threads);
        if (cmd == "simulate") return availbound::cmd_simulate(cfg, out_dir, threads);
        if (cmd == "couple") return availbound::cmd_couple(cfg, out_dir, threads);
        if (cmd == "stationary") return availbound::cmd_stationary(cfg, out_dir, threads);
        return availbound::cmd_verify(cfg, out_dir, threads);
    } catch (const availbound::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
