#pragma once

// Run drivers behind the command-line tool: homogeneous relaxation runs with
// an optional implicit-reference comparison, the fixed-step convergence
// study, and Riemann-problem runs with profile output.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bnrelax/config.hpp"
#include "bnrelax/csv.hpp"
#include "bnrelax/fv1d.hpp"
#include "bnrelax/problems.hpp"
#include "bnrelax/relax.hpp"
#include "bnrelax/rkgl.hpp"

namespace bnrelax {

namespace detail {

inline double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

inline SolverConfig solver_config_from(const RunOptions& o) {
    SolverConfig cfg;
    cfg.r_max = o.r_max;
    cfg.eps_r = o.eps_r;
    cfg.delta_max = o.delta_max;
    cfg.eps_delta = o.eps_delta;
    if (o.delta_norm == "mean")
        cfg.delta_norm = DeltaNorm::Mean;
    else if (o.delta_norm == "max")
        cfg.delta_norm = DeltaNorm::Max;
    else
        throw ConfigError("delta_norm must be 'mean' or 'max', got '" + o.delta_norm + "'");
    cfg.k_max = static_cast<int>(o.k_max);
    cfg.safety = o.safety;
    cfg.eps_dt = o.eps_dt;
    cfg.growth_cap = o.growth_cap;
    cfg.delta_plateau = o.delta_plateau;
    cfg.dt0 = o.dt0;
    cfg.dt_min = o.dt_min;
    cfg.warm_start = o.warm_start;
    if (o.coeff_mask.size() != 9)
        throw ConfigError("coeff_mask must be 9 characters of 0/1");
    for (std::size_t i = 0; i < 9; ++i) {
        if (o.coeff_mask[i] != '0' && o.coeff_mask[i] != '1')
            throw ConfigError("coeff_mask must be 9 characters of 0/1");
        cfg.coeff_mask[i] = o.coeff_mask[i] == '1';
    }
    return cfg;
}

inline HyperbolicConfig hyperbolic_config_from(const RunOptions& o) {
    HyperbolicConfig cfg;
    cfg.cfl = o.cfl;
    if (o.riemann == "rusanov")
        cfg.riemann = RiemannSolver::Rusanov;
    else if (o.riemann == "hll")
        cfg.riemann = RiemannSolver::Hll;
    else if (o.riemann == "hllem")
        cfg.riemann = RiemannSolver::Hllem;
    else
        throw ConfigError("riemann must be rusanov, hll or hllem, got '" + o.riemann + "'");
    if (o.limiter == "minmod")
        cfg.limiter = SlopeLimiter::MinMod;
    else if (o.limiter == "zero")
        cfg.limiter = SlopeLimiter::Zero;
    else
        throw ConfigError("limiter must be minmod or zero, got '" + o.limiter + "'");
    if (o.boundary == "transmissive")
        cfg.boundary = Boundary::Transmissive;
    else if (o.boundary == "periodic")
        cfg.boundary = Boundary::Periodic;
    else
        throw ConfigError("boundary must be transmissive or periodic, got '" + o.boundary +
                          "'");
    cfg.strang_splitting = o.strang;
    cfg.alpha_min = o.alpha_min;
    return cfg;
}

inline SolverConfig inner_relax_config_from(const RunOptions& o) {
    SolverConfig cfg = solver_config_from(o);
    cfg.delta_max = o.relax_delta_max;
    cfg.r_max = o.relax_r_max;
    cfg.dt0 = 0.0;  // resolved per hyperbolic step as relax_dt0_frac * dt
    return cfg;
}

inline InterfaceClosure closure_from(const std::string& name) {
    if (name == "simple") return InterfaceClosure::Simple;
    if (name == "impedance") return InterfaceClosure::Impedance;
    throw ConfigError("closure must be simple or impedance, got '" + name + "'");
}

/// Build the ODE problem: preset plus whatever the options override.
inline OdeProblem ode_problem_from(const RunOptions& o) {
    const ProblemKind kind = problem_from_name(o.problem);
    OdeProblem prob;
    switch (kind) {
        case ProblemKind::A1: prob = preset_a1(); break;
        case ProblemKind::A2: prob = preset_a2(); break;
        case ProblemKind::CustomOde: prob = preset_a1(); break;
        default:
            throw ConfigError("problem '" + o.problem + "' is not an ODE problem");
    }
    if (o.t_end > 0.0) prob.t_end = o.t_end;
    if (o.lambda >= 0.0) prob.params.lambda_fric = o.lambda;
    if (!o.nu.empty()) {
        const std::vector<double> nus = parse_number_list(o.nu);
        if (nus.size() != 1)
            throw ConfigError("ODE runs take a single nu value");
        prob.params.nu_press = nus[0];
    }
    if (o.gamma1 > 0.0 || o.pi1 >= 0.0)
        prob.params.eos1 = EosPhase(o.gamma1 > 0.0 ? o.gamma1 : prob.params.eos1.gamma,
                                    o.pi1 >= 0.0 ? o.pi1 : prob.params.eos1.pi_inf);
    if (o.gamma2 > 0.0 || o.pi2 >= 0.0)
        prob.params.eos2 = EosPhase(o.gamma2 > 0.0 ? o.gamma2 : prob.params.eos2.gamma,
                                    o.pi2 >= 0.0 ? o.pi2 : prob.params.eos2.pi_inf);
    if (!o.closure.empty()) prob.params.interface_closure = closure_from(o.closure);
    if (o.u_interface_weight >= 0.0) prob.params.u_interface_weight = o.u_interface_weight;
    if (o.m1 > 0.0) prob.params.m1 = o.m1;
    if (o.m2 > 0.0) prob.params.m2 = o.m2;
    if (o.has_u1) prob.v0.u1 = o.u1;
    if (o.has_u2) prob.v0.u2 = o.u2;
    if (o.p1 >= 0.0) prob.v0.p1 = o.p1;
    if (o.p2 >= 0.0) prob.v0.p2 = o.p2;
    if (o.alpha1 > 0.0) prob.v0.alpha1 = o.alpha1;
    return prob;
}

/// Build the Riemann problem: preset plus overrides.  nu is handled by the
/// caller (it may be a sweep list).
inline RiemannProblem rp_problem_from(const RunOptions& o) {
    const ProblemKind kind = problem_from_name(o.problem);
    RiemannProblem rp;
    switch (kind) {
        case ProblemKind::RP1: rp = preset_rp1(); break;
        case ProblemKind::RP2: rp = preset_rp2(); break;
        case ProblemKind::RP3: rp = preset_rp3(); break;
        case ProblemKind::CustomRp: rp = preset_rp3(); break;
        default:
            throw ConfigError("problem '" + o.problem + "' is not a Riemann problem");
    }
    if (o.t_end > 0.0) rp.t_end = o.t_end;
    if (o.x_jump >= 0.0) rp.x_jump = o.x_jump;
    if (o.lambda >= 0.0) rp.model.lambda_fric = o.lambda;
    if (o.gamma1 > 0.0 || o.pi1 >= 0.0)
        rp.model.eos1 = EosPhase(o.gamma1 > 0.0 ? o.gamma1 : rp.model.eos1.gamma,
                                 o.pi1 >= 0.0 ? o.pi1 : rp.model.eos1.pi_inf);
    if (o.gamma2 > 0.0 || o.pi2 >= 0.0)
        rp.model.eos2 = EosPhase(o.gamma2 > 0.0 ? o.gamma2 : rp.model.eos2.gamma,
                                 o.pi2 >= 0.0 ? o.pi2 : rp.model.eos2.pi_inf);
    if (!o.closure.empty()) rp.model.closure = closure_from(o.closure);
    if (o.u_interface_weight >= 0.0) rp.model.u_interface_weight = o.u_interface_weight;

    const auto apply_side = [](CellPrimState& w, double rho1, double rho2, bool has_u,
                               double u, double p1, double p2, double alpha1) {
        if (rho1 > 0.0) w.rho1 = rho1;
        if (rho2 > 0.0) w.rho2 = rho2;
        if (has_u) w.u1 = w.u2 = u;
        if (p1 >= 0.0) w.p1 = p1;
        if (p2 >= 0.0) w.p2 = p2;
        if (alpha1 > 0.0) w.alpha1 = alpha1;
    };
    apply_side(rp.left, o.rho1_left, o.rho2_left, o.has_u_left, o.u_left, o.p1_left,
               o.p2_left, o.alpha1_left);
    apply_side(rp.right, o.rho1_right, o.rho2_right, o.has_u_right, o.u_right, o.p1_right,
               o.p2_right, o.alpha1_right);
    return rp;
}

}  // namespace detail

struct RunReport {
    long accepted = 0;
    long rejected = 0;
    std::vector<long> iteration_histogram;
    double wall_seconds = 0.0;
    PrimitiveState final_state{};
    bool has_oracle = false;
    std::array<double, 5> oracle_rel_err{};
    double oracle_max_rel_err = 0.0;
    long fv_steps = 0;
};

struct OdeRunResult {
    RunReport report;
    IntegrationResult integration;
    std::string trajectory_csv;
};

/// Adaptive relaxation run of an ODE problem; optionally compares the end
/// state against the implicit Gauss-Legendre reference.
inline OdeRunResult run_ode(const RunOptions& options) {
    const OdeProblem prob = detail::ode_problem_from(options);
    const SolverConfig cfg = detail::solver_config_from(options);
    std::filesystem::create_directories(options.out_dir);
    echo_resolved_config(options);

    OdeRunResult result;
    const double start = detail::now_seconds();
    result.integration = integrate(prob.v0, 0.0, prob.t_end, prob.params, cfg);
    result.report.wall_seconds = detail::now_seconds() - start;
    result.report.accepted = result.integration.accepted;
    result.report.rejected = result.integration.rejected;
    result.report.iteration_histogram = result.integration.iteration_histogram;
    result.report.final_state = result.integration.trajectory.back().state;

    if (options.oracle) {
        const RkglResult ref = rkgl3_integrate(prob.v0, 0.0, prob.t_end, prob.params);
        const auto got = result.report.final_state.to_array();
        const auto want = ref.trajectory.back().state.to_array();
        result.report.has_oracle = true;
        for (std::size_t i = 0; i < 5; ++i) {
            const double scale = std::max(std::abs(want[i]), 1e-300);
            result.report.oracle_rel_err[i] = std::abs(got[i] - want[i]) / scale;
            result.report.oracle_max_rel_err =
                std::max(result.report.oracle_max_rel_err, result.report.oracle_rel_err[i]);
        }
    }

    result.trajectory_csv = options.out_dir + "/" + options.run_id + "_trajectory.csv";
    write_trajectory_csv(result.trajectory_csv, result.integration.trajectory);
    return result;
}

struct ConvergenceResult {
    std::vector<double> dts;
    std::vector<double> err_p1;
    std::vector<double> err_alpha1;
    double slope_p1 = 0.0;
    double slope_alpha1 = 0.0;
    bool degenerate = false;
    std::string table_csv;
};

/// Fixed-step convergence study: geometric sweep of step counts, endpoint
/// errors against the adaptive implicit reference, least-squares slopes for
/// p1 and alpha1.
inline ConvergenceResult run_convergence(const RunOptions& options) {
    if (options.n_runs < 6) throw ConfigError("convergence study needs n_runs >= 6");
    const OdeProblem prob = detail::ode_problem_from(options);
    SolverConfig cfg = detail::solver_config_from(options);
    cfg.r_max = 1e-12;  // iterate the midpoint to the bottom in fixed-step mode
    std::filesystem::create_directories(options.out_dir);
    echo_resolved_config(options);

    RkglConfig oracle_cfg;
    oracle_cfg.tolerance = 1e-12;
    const RkglResult ref = rkgl3_integrate(prob.v0, 0.0, prob.t_end, prob.params, oracle_cfg);
    const PrimitiveState want = ref.trajectory.back().state;

    ConvergenceResult result;
    // step counts from 32 to 32 * 2^((n-1)/6), geometrically spaced
    const double ratio = std::pow(2.0, 1.0 / 6.0);
    double n_real = 32.0;
    for (long run = 0; run < options.n_runs; ++run, n_real *= ratio) {
        const long n_steps = static_cast<long>(std::lround(n_real));
        const PrimitiveState got =
            integrate_fixed(prob.v0, 0.0, prob.t_end, n_steps, prob.params, cfg);
        result.dts.push_back(prob.t_end / static_cast<double>(n_steps));
        result.err_p1.push_back(std::abs(got.p1 - want.p1) / std::abs(want.p1));
        result.err_alpha1.push_back(std::abs(got.alpha1 - want.alpha1) /
                                    std::abs(want.alpha1));
    }

    const OrderFit fit_p1 = fit_order(result.dts, result.err_p1);
    const OrderFit fit_a1 = fit_order(result.dts, result.err_alpha1);
    result.slope_p1 = fit_p1.slope;
    result.slope_alpha1 = fit_a1.slope;
    result.degenerate = fit_p1.degenerate || fit_a1.degenerate;

    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < result.dts.size(); ++i)
        rows.push_back({result.dts[i], result.err_p1[i], result.err_alpha1[i]});
    result.table_csv = options.out_dir + "/" + options.run_id + "_convergence.csv";
    write_table_csv(result.table_csv, {"dt", "err_p1", "err_alpha1"}, rows);
    return result;
}

struct RpRunResult {
    std::vector<double> nus;
    // one snapshot sequence per nu value
    std::vector<std::vector<Snapshot>> runs;
    RiemannProblem problem;
    RunReport report;
    std::vector<std::string> csv_files;
};

/// Riemann-problem run; a comma list in options.nu produces one profile set
/// per value.
inline RpRunResult run_rp(const RunOptions& options) {
    if (options.cells < 100) throw ConfigError("rp runs need cells >= 100");
    RpRunResult result;
    result.problem = detail::rp_problem_from(options);
    const HyperbolicConfig hyp = detail::hyperbolic_config_from(options);
    const SolverConfig inner = detail::inner_relax_config_from(options);
    std::filesystem::create_directories(options.out_dir);
    echo_resolved_config(options);

    result.nus = options.nu.empty() ? std::vector<double>{result.problem.model.nu_press}
                                    : parse_number_list(options.nu);
    if (result.nus.empty()) throw ConfigError("empty nu list");

    std::vector<double> snapshot_times;
    if (!options.snapshots.empty()) snapshot_times = parse_number_list(options.snapshots);

    const double start = detail::now_seconds();
    for (std::size_t k = 0; k < result.nus.size(); ++k) {
        RiemannProblem rp = result.problem;
        rp.model.nu_press = result.nus[k];
        SolverConfig cell_cfg = inner;
        RpRunStats stats;
        std::vector<Snapshot> snaps =
            run_riemann_problem(rp, options.cells, hyp, cell_cfg, snapshot_times, &stats);
        result.report.fv_steps += stats.steps;

        const std::string run_tag =
            result.nus.size() == 1 ? options.run_id
                                   : options.run_id + "_nu" + std::to_string(k);
        for (std::size_t s = 0; s < snaps.size(); ++s) {
            const std::string path = options.out_dir + "/" + run_tag + "_t" +
                                     std::to_string(s) + ".csv";
            write_snapshot_csv(path, snaps[s].field, rp.model.eos1, rp.model.eos2);
            result.csv_files.push_back(path);
        }
        result.runs.push_back(std::move(snaps));
    }
    result.report.wall_seconds = detail::now_seconds() - start;
    result.report.accepted = 1;
    return result;
}

}  // namespace bnrelax
