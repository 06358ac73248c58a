// Command-line front end: relaxation ODE runs, the fixed-step convergence
// study, and 1D Riemann-problem runs.
//
// Exit codes: 0 success, 1 configuration error, 2 solver failure.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "bnrelax/harness.hpp"

namespace {

struct FlagSet {
    std::string config_path;
    std::string problem, out_dir, run_id, nu, riemann, limiter, boundary, closure,
        delta_norm, coeff_mask, snapshots;
    double delta_max = 0, dt0 = 0, cfl = 0, lambda = 0, t_end = 0, r_max = 0,
           x_jump = 0, alpha_min = 0, relax_delta_max = 0, growth_cap = 0;
    long cells = 0, n_runs = 0, k_max = 0;
    bool oracle = false;
    bool strang = false;
};

void add_common_flags(CLI::App* cmd, FlagSet& flags) {
    cmd->add_option("--config", flags.config_path, "flat key = value configuration file");
    cmd->add_option("--problem", flags.problem, "built-in problem name or custom-*");
    cmd->add_option("--delta-max", flags.delta_max, "linearisation tolerance");
    cmd->add_option("--r-max", flags.r_max, "midpoint iteration cutoff");
    cmd->add_option("--dt0", flags.dt0, "initial timestep [s]");
    cmd->add_option("--t-end", flags.t_end, "final time [s]");
    cmd->add_option("--lambda", flags.lambda, "velocity relaxation rate");
    cmd->add_option("--nu", flags.nu, "pressure relaxation rate (rp: comma list sweeps)");
    cmd->add_option("--out-dir", flags.out_dir, "output directory");
    cmd->add_option("--run-id", flags.run_id, "output file prefix");
    cmd->add_option("--delta-norm", flags.delta_norm, "delta metric norm: mean|max");
    cmd->add_option("--coeff-mask", flags.coeff_mask, "9 chars of 0/1 for the delta metric");
    cmd->add_option("--k-max", flags.k_max, "midpoint iteration limit");
    cmd->add_option("--growth-cap", flags.growth_cap, "max timestep growth per step");
    cmd->add_option("--closure", flags.closure, "interface closure: simple|impedance");
}

// flags beat file values beat presets
void resolve(const CLI::App* cmd, const FlagSet& flags, bnrelax::RunOptions& options) {
    if (!flags.config_path.empty()) bnrelax::load_config(flags.config_path, options);
    const auto given = [&](const char* flag) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    const auto set = [&](const char* flag, const char* key, const std::string& value) {
        if (given(flag)) bnrelax::apply_override(options, key, value);
    };
    set("--problem", "problem", flags.problem);
    set("--delta-max", "delta_max", bnrelax::format_full(flags.delta_max));
    set("--r-max", "r_max", bnrelax::format_full(flags.r_max));
    set("--dt0", "dt0", bnrelax::format_full(flags.dt0));
    set("--t-end", "t_end", bnrelax::format_full(flags.t_end));
    set("--lambda", "lambda", bnrelax::format_full(flags.lambda));
    set("--nu", "nu", flags.nu);
    set("--out-dir", "out_dir", flags.out_dir);
    set("--run-id", "run_id", flags.run_id);
    set("--delta-norm", "delta_norm", flags.delta_norm);
    set("--coeff-mask", "coeff_mask", flags.coeff_mask);
    set("--k-max", "k_max", std::to_string(flags.k_max));
    set("--growth-cap", "growth_cap", bnrelax::format_full(flags.growth_cap));
    set("--closure", "closure", flags.closure);
    if (given("--oracle")) bnrelax::apply_override(options, "oracle", "true");
    if (given("--cells"))
        bnrelax::apply_override(options, "cells", std::to_string(flags.cells));
    if (given("--riemann")) bnrelax::apply_override(options, "riemann", flags.riemann);
    if (given("--limiter")) bnrelax::apply_override(options, "limiter", flags.limiter);
    if (given("--boundary"))
        bnrelax::apply_override(options, "boundary", flags.boundary);
    if (given("--cfl"))
        bnrelax::apply_override(options, "cfl", bnrelax::format_full(flags.cfl));
    if (given("--strang")) bnrelax::apply_override(options, "strang", "true");
    if (given("--x-jump"))
        bnrelax::apply_override(options, "x_jump", bnrelax::format_full(flags.x_jump));
    if (given("--alpha-min"))
        bnrelax::apply_override(options, "alpha_min", bnrelax::format_full(flags.alpha_min));
    if (given("--relax-delta-max"))
        bnrelax::apply_override(options, "relax_delta_max",
                                bnrelax::format_full(flags.relax_delta_max));
    if (given("--n-runs"))
        bnrelax::apply_override(options, "n_runs", std::to_string(flags.n_runs));
    if (given("--snapshots"))
        bnrelax::apply_override(options, "snapshots", flags.snapshots);
}

void print_report(const bnrelax::RunReport& report) {
    std::printf("accepted steps:  %ld\n", report.accepted);
    std::printf("rejected steps:  %ld\n", report.rejected);
    if (!report.iteration_histogram.empty()) {
        std::printf("iterations:     ");
        for (std::size_t k = 1; k < report.iteration_histogram.size(); ++k)
            if (report.iteration_histogram[k] > 0)
                std::printf(" %zux%ld", k, report.iteration_histogram[k]);
        std::printf("\n");
    }
    std::printf("wall time:       %.3f s\n", report.wall_seconds);
    const auto& v = report.final_state;
    std::printf("final state:     u1=%.10g u2=%.10g p1=%.10g p2=%.10g alpha1=%.10g\n",
                v.u1, v.u2, v.p1, v.p2, v.alpha1);
    if (report.has_oracle) {
        std::printf("vs reference:    du1=%.3e du2=%.3e dp1=%.3e dp2=%.3e dalpha1=%.3e\n",
                    report.oracle_rel_err[0], report.oracle_rel_err[1],
                    report.oracle_rel_err[2], report.oracle_rel_err[3],
                    report.oracle_rel_err[4]);
        std::printf("max rel error:   %.3e\n", report.oracle_max_rel_err);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stiff mechanical-relaxation solvers for two-phase flow"};
    app.require_subcommand(1);

    FlagSet ode_flags, conv_flags, rp_flags;

    CLI::App* ode = app.add_subcommand("ode", "adaptive relaxation run of an ODE problem");
    add_common_flags(ode, ode_flags);
    ode->add_flag("--oracle", ode_flags.oracle,
                  "also run the implicit reference and report errors");

    CLI::App* conv = app.add_subcommand("convergence", "fixed-step convergence study");
    add_common_flags(conv, conv_flags);
    conv->add_option("--n-runs", conv_flags.n_runs, "number of step sizes (>= 6)");

    CLI::App* rp = app.add_subcommand("rp", "1D Riemann problem run");
    add_common_flags(rp, rp_flags);
    rp->add_option("--cells", rp_flags.cells, "number of cells (>= 100)");
    rp->add_option("--riemann", rp_flags.riemann, "rusanov | hll | hllem");
    rp->add_option("--limiter", rp_flags.limiter, "minmod | zero");
    rp->add_option("--boundary", rp_flags.boundary, "transmissive | periodic");
    rp->add_option("--cfl", rp_flags.cfl, "CFL number");
    rp->add_flag("--strang", rp_flags.strang, "Strang splitting");
    rp->add_option("--x-jump", rp_flags.x_jump, "initial discontinuity position [m]");
    rp->add_option("--alpha-min", rp_flags.alpha_min, "volume fraction clamp margin");
    rp->add_option("--relax-delta-max", rp_flags.relax_delta_max,
                   "inner relaxation delta tolerance");
    rp->add_option("--snapshots", rp_flags.snapshots, "comma-separated output times [s]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        bnrelax::RunOptions options;
        if (ode->parsed()) {
            resolve(ode, ode_flags, options);
            const bnrelax::OdeRunResult result = bnrelax::run_ode(options);
            print_report(result.report);
            std::printf("trajectory csv:  %s\n", result.trajectory_csv.c_str());
        } else if (conv->parsed()) {
            resolve(conv, conv_flags, options);
            const bnrelax::ConvergenceResult result = bnrelax::run_convergence(options);
            for (std::size_t i = 0; i < result.dts.size(); ++i)
                std::printf("dt=%.6e  err_p1=%.6e  err_alpha1=%.6e\n", result.dts[i],
                            result.err_p1[i], result.err_alpha1[i]);
            if (result.degenerate)
                std::printf("order fit: degenerate (errors at round-off)\n");
            else
                std::printf("order fit: slope_p1=%.3f slope_alpha1=%.3f\n", result.slope_p1,
                            result.slope_alpha1);
            std::printf("table csv: %s\n", result.table_csv.c_str());
        } else if (rp->parsed()) {
            resolve(rp, rp_flags, options);
            const bnrelax::RpRunResult result = bnrelax::run_rp(options);
            std::printf("hyperbolic steps: %ld\n", result.report.fv_steps);
            std::printf("wall time:        %.3f s\n", result.report.wall_seconds);
            for (const std::string& file : result.csv_files)
                std::printf("profile csv:      %s\n", file.c_str());
        }
    } catch (const bnrelax::ConfigError& err) {
        std::fprintf(stderr, "configuration error: %s\n", err.what());
        return 1;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "solver failure: %s\n", err.what());
        return 2;
    }
    return 0;
}
