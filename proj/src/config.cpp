#include "availbound/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "availbound/errors.hpp"

namespace availbound {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

class KeyValues {
public:
    explicit KeyValues(const std::string& text) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos)
                fail("ConfigError", "line " + std::to_string(lineno) + " is not key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty()) fail("ConfigError", "empty key on line " + std::to_string(lineno));
            kv_[key] = val;
        }
    }

    bool has(const std::string& k) const { return kv_.count(k) > 0; }

    std::string str(const std::string& k, const std::string& dflt) const {
        auto it = kv_.find(k);
        return it == kv_.end() ? dflt : it->second;
    }

    std::string require(const std::string& k) const {
        auto it = kv_.find(k);
        if (it == kv_.end()) fail("ConfigError", "missing required key " + k);
        return it->second;
    }

    double num(const std::string& k, double dflt) const {
        return has(k) ? parse_num(k, kv_.at(k)) : dflt;
    }

    double require_num(const std::string& k) const { return parse_num(k, require(k)); }

    long integer(const std::string& k, long dflt) const {
        return has(k) ? static_cast<long>(parse_num(k, kv_.at(k))) : dflt;
    }

    bool flag(const std::string& k, bool dflt) const {
        if (!has(k)) return dflt;
        const std::string v = kv_.at(k);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail("ConfigError", "key " + k + " must be a boolean, got '" + v + "'");
    }

private:
    static double parse_num(const std::string& k, const std::string& v) {
        try {
            std::size_t pos = 0;
            const double x = std::stod(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return x;
        } catch (const std::exception&) {
            fail("ConfigError", "key " + k + " is not numeric: '" + v + "'");
        }
    }

    std::map<std::string, std::string> kv_;
};

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::string item;
    std::istringstream in(v);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            fail("ConfigError", "key " + key + " has a non-numeric entry '" + item + "'");
        }
    }
    if (out.empty()) fail("ConfigError", "key " + key + " lists no values");
    return out;
}

SystemState parse_state(const std::string& key, const std::string& v) {
    const std::size_t colon = v.find(':');
    if (colon == std::string::npos)
        fail("ConfigError", "key " + key + " must look like regime:elapsed, e.g. 1:0");
    const std::string reg = trim(v.substr(0, colon));
    SystemState st;
    if (reg == "1" || reg == "working")
        st.regime = Regime::Working;
    else if (reg == "2" || reg == "repair")
        st.regime = Regime::Repair;
    else
        fail("ConfigError", "key " + key + " has unknown regime '" + reg + "'");
    try {
        st.elapsed = std::stod(trim(v.substr(colon + 1)));
    } catch (const std::exception&) {
        fail("ConfigError", "key " + key + " has a non-numeric elapsed time");
    }
    if (st.elapsed < 0.0) fail("ConfigError", "key " + key + " needs elapsed >= 0");
    return st;
}

} // namespace

std::vector<std::pair<double, double>> load_two_column_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("ConfigError", "cannot open CSV file " + path);
    std::vector<std::pair<double, double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double a, b;
        if (ls >> a >> b) {
            rows.emplace_back(a, b);
        } else if (!trim(line).empty()) {
            fail("ConfigError",
                 path + ":" + std::to_string(lineno) + " is not a two-column numeric row");
        }
    }
    if (rows.empty()) fail("ConfigError", "CSV file " + path + " holds no data rows");
    return rows;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("ConfigError", "cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();

    RunConfig c;
    c.raw_text = buf.str();
    const KeyValues kv(c.raw_text);

    c.model.k1 = kv.require_num("model.K1");
    c.model.k2 = kv.require_num("model.K2");
    c.model.lambda = kv.require_num("model.Lambda");
    c.model.inversion_tol = kv.num("model.inversion_tol", 1e-12);

    const std::string wf = kv.str("model.work_family", "pareto_hazard");
    if (wf == "pareto_hazard") {
        c.model.work_family = WorkFamily::ParetoHazard;
    } else if (wf == "tabulated_hazard") {
        c.model.work_family = WorkFamily::TabulatedHazard;
        for (auto [s, l] : load_two_column_csv(kv.require("model.work_hazard_csv"))) {
            c.model.hazard_grid.s.push_back(s);
            c.model.hazard_grid.lambda.push_back(l);
        }
    } else {
        fail("ConfigError", "model.work_family must be pareto_hazard or tabulated_hazard");
    }
    const std::string rf = kv.str("model.repair_family", "pareto");
    if (rf == "pareto") {
        c.model.repair_family = RepairFamily::Pareto;
    } else if (rf == "tabulated_cdf") {
        c.model.repair_family = RepairFamily::TabulatedCdf;
        for (auto [s, f] : load_two_column_csv(kv.require("model.repair_cdf_csv"))) {
            c.model.repair_grid.s.push_back(s);
            c.model.repair_grid.F.push_back(f);
        }
    } else {
        fail("ConfigError", "model.repair_family must be pareto or tabulated_cdf");
    }

    c.alpha = kv.require_num("bound.alpha");
    const std::string mode = kv.str("bound.theta0_mode", "bracket");
    if (mode == "exact")
        c.theta0_mode = Theta0Mode::Exact;
    else if (mode == "bracket")
        c.theta0_mode = Theta0Mode::Bracket;
    else
        fail("ConfigError", "bound.theta0_mode must be exact or bracket");
    c.search = kv.flag("bound.search", false);
    if (c.search) {
        c.search_spec.r_min = kv.num("bound.search.r_min", 0.0);
        c.search_spec.r_max = kv.num("bound.search.r_max", 3.0);
        c.search_spec.r_points = static_cast<int>(kv.integer("bound.search.r_points", 40));
        c.search_spec.n_min = kv.num("bound.search.n_min", 1.0);
        c.search_spec.n_max = kv.num("bound.search.n_max", 20.0);
        c.search_spec.n_points = static_cast<int>(kv.integer("bound.search.n_points", 20));
        c.search_spec.integer_n = kv.flag("bound.search.integer_n", true);
        c.search_spec.refine_passes = static_cast<int>(kv.integer("bound.search.refine_passes", 2));
    } else {
        c.bound.R = kv.require_num("bound.R");
        c.bound.N = kv.require_num("bound.N");
    }
    c.bound.alpha = c.alpha;
    c.tolerances.quad_abs = kv.num("bound.quadrature_tol", 1e-10);
    c.tolerances.series_rel = kv.num("bound.series_tol", 1e-8);

    if (!kv.has("sim.seed"))
        fail("ConfigError", "sim.seed is required; runs are never seeded from the clock");
    c.seed = static_cast<std::uint64_t>(kv.require_num("sim.seed"));
    c.n_traj = kv.integer("sim.n_traj", 100000);
    if (kv.has("sim.grid")) {
        c.grid = parse_list("sim.grid", kv.require("sim.grid"));
    } else {
        const double gmax = kv.num("sim.grid_max", 100.0);
        const long gp = kv.integer("sim.grid_points", 50);
        if (gp < 2 || !(gmax > 0.0))
            fail("ConfigError", "sim.grid_max/sim.grid_points must define a usable grid");
        for (long i = 0; i < gp; ++i)
            c.grid.push_back(gmax * static_cast<double>(i) / static_cast<double>(gp - 1));
    }
    for (std::size_t i = 1; i < c.grid.size(); ++i)
        if (!(c.grid[i] > c.grid[i - 1]))
            fail("ConfigError", "sim.grid must be strictly increasing");
    if (c.grid.front() < 0.0) fail("ConfigError", "sim.grid must be nonnegative");
    c.ci_level = kv.num("sim.ci_level", 0.99);
    if (!(c.ci_level > 0.0 && c.ci_level < 1.0))
        fail("ConfigError", "sim.ci_level must lie in (0,1)");
    c.x0 = kv.has("sim.x0") ? parse_state("sim.x0", kv.require("sim.x0"))
                            : SystemState{Regime::Working, 0.0};

    c.couple_runs = kv.integer("couple.n_runs", 10000);
    if (kv.has("couple.x0a")) c.couple_x0a = parse_state("couple.x0a", kv.require("couple.x0a"));
    if (kv.has("couple.x0b")) c.couple_x0b = parse_state("couple.x0b", kv.require("couple.x0b"));
    c.event_cap = kv.integer("couple.event_cap", 10000000);
    c.ks_draws = kv.integer("couple.ks_draws", 100000);
    c.ks_cycles = kv.integer("couple.ks_cycles", 100000);
    c.ks_x = kv.num("couple.ks_x", 0.0);
    c.ks_y = kv.num("couple.ks_y", 1.0);

    c.out_dir = kv.str("output.dir", "out");
    const std::string formats = kv.str("output.formats", "json,csv");
    c.out_json = formats.find("json") != std::string::npos;
    c.out_csv = formats.find("csv") != std::string::npos;
    return c;
}

} // namespace availbound
