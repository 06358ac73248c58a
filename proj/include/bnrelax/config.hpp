#pragma once

// Flat key = value configuration files ('#' comments) plus the resolved-run
// option set.  Precedence: command-line flags override file values override
// problem presets.  The fully resolved configuration is echoed into the run
// directory so any run can be reproduced from its output alone.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bnrelax/csv.hpp"
#include "bnrelax/fv1d.hpp"
#include "bnrelax/problems.hpp"

namespace bnrelax {

struct RunOptions {
    std::string problem = "A1";
    std::string out_dir = "out";
    std::string run_id = "run";
    bool oracle = false;
    long n_runs = 40;  // convergence study sweeps

    // relaxation solver
    double delta_max = 0.5;
    double r_max = 0.15;
    double eps_r = 1e-30;
    double eps_delta = 1e-5;
    std::string delta_norm = "mean";
    long k_max = 8;
    double safety = 0.8;
    double eps_dt = 1e-14;
    double growth_cap = 10.0;
    double delta_plateau = 1e-8;
    double dt0 = 0.0;
    double dt_min = 0.0;
    bool warm_start = false;
    std::string coeff_mask = "110000101";

    // model parameters (ODE runs and RP overrides)
    double t_end = -1.0;  // < 0: preset value
    double lambda = -1.0;
    std::string nu = "";  // single value or comma list (RP sweeps)
    double gamma1 = -1.0, gamma2 = -1.0;
    double pi1 = -1.0, pi2 = -1.0;
    std::string closure = "";  // simple | impedance
    double u_interface_weight = -1.0;

    // ODE initial data overrides
    double m1 = -1.0, m2 = -1.0;
    double u1 = 0.0, u2 = 0.0, p1 = -1.0, p2 = -1.0, alpha1 = -1.0;
    bool has_u1 = false, has_u2 = false;

    // finite-volume runs
    long cells = 2000;
    double cfl = 0.95;
    std::string riemann = "hllem";
    std::string limiter = "minmod";
    std::string boundary = "transmissive";
    bool strang = false;
    double alpha_min = 1e-12;
    double x_jump = -1.0;
    std::string snapshots = "";  // comma-separated times

    // custom RP initial data
    double rho1_left = -1.0, rho2_left = -1.0, u_left = 0.0, p1_left = -1.0,
           p2_left = -1.0, alpha1_left = -1.0;
    double rho1_right = -1.0, rho2_right = -1.0, u_right = 0.0, p1_right = -1.0,
           p2_right = -1.0, alpha1_right = -1.0;
    bool has_u_left = false, has_u_right = false;

    // inner relaxation solver of the FV layer
    double relax_delta_max = 2.0;
    double relax_r_max = 0.15;
    double relax_dt0_frac = 0.25;
};

namespace detail {

enum class OptType { Double, Long, Bool, String };

struct OptEntry {
    OptType type;
    void* target;
    bool* presence = nullptr;  // optional flag set when the key is assigned
};

inline std::map<std::string, OptEntry> option_table(RunOptions& o) {
    return {
        {"problem", {OptType::String, &o.problem}},
        {"out_dir", {OptType::String, &o.out_dir}},
        {"run_id", {OptType::String, &o.run_id}},
        {"oracle", {OptType::Bool, &o.oracle}},
        {"n_runs", {OptType::Long, &o.n_runs}},
        {"delta_max", {OptType::Double, &o.delta_max}},
        {"r_max", {OptType::Double, &o.r_max}},
        {"eps_r", {OptType::Double, &o.eps_r}},
        {"eps_delta", {OptType::Double, &o.eps_delta}},
        {"delta_norm", {OptType::String, &o.delta_norm}},
        {"k_max", {OptType::Long, &o.k_max}},
        {"safety", {OptType::Double, &o.safety}},
        {"eps_dt", {OptType::Double, &o.eps_dt}},
        {"growth_cap", {OptType::Double, &o.growth_cap}},
        {"delta_plateau", {OptType::Double, &o.delta_plateau}},
        {"dt0", {OptType::Double, &o.dt0}},
        {"dt_min", {OptType::Double, &o.dt_min}},
        {"warm_start", {OptType::Bool, &o.warm_start}},
        {"coeff_mask", {OptType::String, &o.coeff_mask}},
        {"t_end", {OptType::Double, &o.t_end}},
        {"lambda", {OptType::Double, &o.lambda}},
        {"nu", {OptType::String, &o.nu}},
        {"gamma1", {OptType::Double, &o.gamma1}},
        {"gamma2", {OptType::Double, &o.gamma2}},
        {"pi1", {OptType::Double, &o.pi1}},
        {"pi2", {OptType::Double, &o.pi2}},
        {"closure", {OptType::String, &o.closure}},
        {"u_interface_weight", {OptType::Double, &o.u_interface_weight}},
        {"m1", {OptType::Double, &o.m1}},
        {"m2", {OptType::Double, &o.m2}},
        {"u1", {OptType::Double, &o.u1, &o.has_u1}},
        {"u2", {OptType::Double, &o.u2, &o.has_u2}},
        {"p1", {OptType::Double, &o.p1}},
        {"p2", {OptType::Double, &o.p2}},
        {"alpha1", {OptType::Double, &o.alpha1}},
        {"cells", {OptType::Long, &o.cells}},
        {"cfl", {OptType::Double, &o.cfl}},
        {"riemann", {OptType::String, &o.riemann}},
        {"limiter", {OptType::String, &o.limiter}},
        {"boundary", {OptType::String, &o.boundary}},
        {"strang", {OptType::Bool, &o.strang}},
        {"alpha_min", {OptType::Double, &o.alpha_min}},
        {"x_jump", {OptType::Double, &o.x_jump}},
        {"snapshots", {OptType::String, &o.snapshots}},
        {"rho1_left", {OptType::Double, &o.rho1_left}},
        {"rho2_left", {OptType::Double, &o.rho2_left}},
        {"u_left", {OptType::Double, &o.u_left, &o.has_u_left}},
        {"p1_left", {OptType::Double, &o.p1_left}},
        {"p2_left", {OptType::Double, &o.p2_left}},
        {"alpha1_left", {OptType::Double, &o.alpha1_left}},
        {"rho1_right", {OptType::Double, &o.rho1_right}},
        {"rho2_right", {OptType::Double, &o.rho2_right}},
        {"u_right", {OptType::Double, &o.u_right, &o.has_u_right}},
        {"p1_right", {OptType::Double, &o.p1_right}},
        {"p2_right", {OptType::Double, &o.p2_right}},
        {"alpha1_right", {OptType::Double, &o.alpha1_right}},
        {"relax_delta_max", {OptType::Double, &o.relax_delta_max}},
        {"relax_r_max", {OptType::Double, &o.relax_r_max}},
        {"relax_dt0_frac", {OptType::Double, &o.relax_dt0_frac}},
    };
}

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::string valid_keys_message() {
    RunOptions scratch;
    std::string keys;
    for (const auto& [key, entry] : option_table(scratch)) {
        if (!keys.empty()) keys += ", ";
        keys += key;
    }
    return keys;
}

inline void assign_option(RunOptions& options, const std::string& key,
                          const std::string& value, const std::string& where) {
    auto table = option_table(options);
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError(where + ": unknown key '" + key +
                          "'; valid keys: " + valid_keys_message());
    const OptEntry& entry = it->second;
    switch (entry.type) {
        case OptType::Double: {
            std::size_t used = 0;
            double parsed = 0.0;
            try {
                parsed = std::stod(value, &used);
            } catch (const std::exception&) {
                throw ConfigError(where + ": key '" + key + "' expects a number, got '" +
                                  value + "'");
            }
            if (used != value.size())
                throw ConfigError(where + ": key '" + key + "' expects a number, got '" +
                                  value + "'");
            *static_cast<double*>(entry.target) = parsed;
            break;
        }
        case OptType::Long: {
            std::size_t used = 0;
            long parsed = 0;
            try {
                parsed = std::stol(value, &used);
            } catch (const std::exception&) {
                throw ConfigError(where + ": key '" + key + "' expects an integer, got '" +
                                  value + "'");
            }
            if (used != value.size())
                throw ConfigError(where + ": key '" + key + "' expects an integer, got '" +
                                  value + "'");
            *static_cast<long*>(entry.target) = parsed;
            break;
        }
        case OptType::Bool: {
            if (value == "true" || value == "1" || value == "yes")
                *static_cast<bool*>(entry.target) = true;
            else if (value == "false" || value == "0" || value == "no")
                *static_cast<bool*>(entry.target) = false;
            else
                throw ConfigError(where + ": key '" + key + "' expects a boolean, got '" +
                                  value + "'");
            break;
        }
        case OptType::String:
            *static_cast<std::string*>(entry.target) = value;
            break;
    }
    if (entry.presence != nullptr) *entry.presence = true;
}

}  // namespace detail

/// Apply a flat key = value file onto the option set.
inline void load_config(const std::string& path, RunOptions& options) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        detail::assign_option(options, key, value,
                              path + ":" + std::to_string(line_no));
    }
}

/// Apply one flag-style override (used by the CLI after file loading).
inline void apply_override(RunOptions& options, const std::string& key,
                           const std::string& value) {
    detail::assign_option(options, key, value, "flag --" + key);
}

/// Echo every resolved key into <out_dir>/<run_id>_config.cfg; the file can
/// be fed back through --config.
inline std::string echo_resolved_config(const RunOptions& options) {
    std::filesystem::create_directories(options.out_dir);
    const std::string path = options.out_dir + "/" + options.run_id + "_config.cfg";
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write resolved config '" + path + "'");
    RunOptions copy = options;
    auto table = detail::option_table(copy);
    for (const auto& [key, entry] : table) {
        out << key << " = ";
        switch (entry.type) {
            case detail::OptType::Double:
                out << format_full(*static_cast<double*>(entry.target));
                break;
            case detail::OptType::Long:
                out << *static_cast<long*>(entry.target);
                break;
            case detail::OptType::Bool:
                out << (*static_cast<bool*>(entry.target) ? "true" : "false");
                break;
            case detail::OptType::String:
                out << *static_cast<std::string*>(entry.target);
                break;
        }
        out << '\n';
    }
    return path;
}

inline std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        token = detail::trim(token);
        if (token.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size())
            throw ConfigError("expected a number in list, got '" + token + "'");
        out.push_back(v);
    }
    return out;
}

}  // namespace bnrelax
