#pragma once

// Iterative linearised exponential integrator for the stiff mechanical
// relaxation ODE system
//
//   du1/dt = lambda/(a1 r1) (u2 - u1)
//   du2/dt = lambda/(a2 r2) (u1 - u2)
//   dp1/dt = nu (pI + k1a p1 + k1b)/(a1 k1a) (p2 - p1)
//            + lambda (uI - u1)/(a1 k1a) (u2 - u1)
//   dp2/dt = nu (pI + k2a p2 + k2b)/(a2 k2a) (p1 - p2)
//            + lambda (uI - u2)/(a2 k2a) (u1 - u2)
//   da1/dt = nu (p1 - p2)
//
// The velocity pair decouples and is solved exactly.  The pressure pair is
// solved exactly after freezing its coefficients at an iteratively refined
// midpoint state; the velocity-work forcing decays as e^{-2 k_vel tau} and is
// integrated in closed form, as is the volume fraction.  No linear algebra,
// no Jacobian inversion: only scalar exponentials.

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "bnrelax/eos.hpp"
#include "bnrelax/expmath.hpp"

namespace bnrelax {

struct Admissibility {
    bool ok;
    const char* reason;  // "" when ok
};

/// Positive phase internal energies, alpha1 strictly inside (0,1), all
/// components finite.  No epsilon floors.
inline Admissibility admissible(const PrimitiveState& v, const OdeParams& params) {
    for (double c : v.to_array())
        if (!std::isfinite(c)) return {false, "non-finite component"};
    if (!(v.alpha1 > 0.0 && v.alpha1 < 1.0)) return {false, "alpha1 out of (0,1)"};
    if (!(v.p1 + params.eos1.gamma * params.eos1.pi_inf > 0.0))
        return {false, "non-positive phase-1 internal energy"};
    if (!(v.p2 + params.eos2.gamma * params.eos2.pi_inf > 0.0))
        return {false, "non-positive phase-2 internal energy"};
    return {true, ""};
}

inline InterfaceState ode_interface_state(const PrimitiveState& v, const OdeParams& params) {
    return interface_state(v, params, params.m1 / v.alpha1, params.m2 / (1.0 - v.alpha1));
}

namespace detail {
inline std::array<double, 5> source_rhs_frozen(const PrimitiveState& v,
                                               const OdeParams& params, double p_i,
                                               double u_i) {
    const double a1 = v.alpha1;
    const double a2 = 1.0 - v.alpha1;
    const EosPhase& e1 = params.eos1;
    const EosPhase& e2 = params.eos2;
    const double du21 = v.u2 - v.u1;
    const double dp21 = v.p2 - v.p1;
    std::array<double, 5> f;
    f[0] = params.lambda_fric / params.m1 * du21;
    f[1] = -params.lambda_fric / params.m2 * du21;
    f[2] = params.nu_press * (p_i + e1.k_a * v.p1 + e1.k_b) / (a1 * e1.k_a) * dp21 +
           params.lambda_fric * (u_i - v.u1) / (a1 * e1.k_a) * du21;
    f[3] = -params.nu_press * (p_i + e2.k_a * v.p2 + e2.k_b) / (a2 * e2.k_a) * dp21 -
           params.lambda_fric * (u_i - v.u2) / (a2 * e2.k_a) * du21;
    f[4] = -params.nu_press * dp21;
    return f;
}
}  // namespace detail

/// Right-hand side of the five relaxation equations, interface closure
/// evaluated at v.
inline std::array<double, 5> source_rhs(const PrimitiveState& v, const OdeParams& params) {
    const InterfaceState is = ode_interface_state(v, params);
    return detail::source_rhs_frozen(v, params, is.p_i, is.u_i);
}

/// Exact solution of the velocity pair after elapsed time tau.  Written as a
/// correction to the initial values so that u1 == u2 is a bit-exact fixed
/// point and the mixture momentum m1 u1 + m2 u2 is conserved to round-off.
inline std::array<double, 2> velocity_exact(const PrimitiveState& v0,
                                            const OdeParams& params, double tau) {
    const double k_vel = params.lambda_fric * (1.0 / params.m1 + 1.0 / params.m2);
    const double total = params.m1 + params.m2;
    const double du = v0.u1 - v0.u2;
    const double relaxed = -std::expm1(-k_vel * tau);  // 1 - e^{-k_vel tau}
    return {v0.u1 - params.m2 / total * du * relaxed,
            v0.u2 + params.m1 / total * du * relaxed};
}

// Affine midpoint operator defining the solvable linear IVP.  kp/ku follow
// the pressure equations read off at the linearisation state with frozen
// interface pressure; the velocity-work forcing of phase i is
// forcing_coeff_i * (u1-u2)_n^2 * e^{-2 k_vel tau}.
struct LinearOperator {
    double k_vel;            // lambda (1/m1 + 1/m2)
    double u_inf;            // momentum-weighted mean velocity at v_star
    double kp1, kp2;         // pressure coupling rates [1/s]
    double ku1, ku2;         // velocity-work coefficients
    double w1, w2;           // frozen uI weights (uI = w1 u1 + w2 u2)
    double p_interface;      // frozen pI at v_star
    double u_interface;      // uI at v_star
    double forcing_coeff1;   // ku1 * w2
    double forcing_coeff2;   // ku2 * w1
    double g1_star, g2_star; // forcing amplitudes at v_star's velocity gap
    PrimitiveState v_star;
};

inline LinearOperator build_linear_operator(const PrimitiveState& v_star,
                                            const OdeParams& params) {
    const Admissibility adm = admissible(v_star, params);
    if (!adm.ok)
        throw InadmissibleState(std::string("build_linear_operator: ") + adm.reason);

    const double a1 = v_star.alpha1;
    const double a2 = 1.0 - v_star.alpha1;
    const EosPhase& e1 = params.eos1;
    const EosPhase& e2 = params.eos2;
    const InterfaceState is = ode_interface_state(v_star, params);

    LinearOperator op;
    op.k_vel = params.lambda_fric * (1.0 / params.m1 + 1.0 / params.m2);
    op.u_inf = (params.m1 * v_star.u1 + params.m2 * v_star.u2) / (params.m1 + params.m2);
    op.kp1 = params.nu_press * (is.p_i + e1.k_a * v_star.p1 + e1.k_b) / (a1 * e1.k_a);
    op.kp2 = params.nu_press * (is.p_i + e2.k_a * v_star.p2 + e2.k_b) / (a2 * e2.k_a);
    op.ku1 = params.lambda_fric / (a1 * e1.k_a);
    op.ku2 = params.lambda_fric / (a2 * e2.k_a);
    op.w1 = params.u_interface_weight;
    op.w2 = 1.0 - op.w1;
    op.p_interface = is.p_i;
    op.u_interface = is.u_i;
    op.forcing_coeff1 = op.ku1 * op.w2;
    op.forcing_coeff2 = op.ku2 * op.w1;
    const double du_star = v_star.u1 - v_star.u2;
    op.g1_star = op.forcing_coeff1 * du_star * du_star;
    op.g2_star = op.forcing_coeff2 * du_star * du_star;
    op.v_star = v_star;
    return op;
}

/// Closed-form solution of the linearised problem started at v_n, evaluated
/// after elapsed time tau.  Three stages: exact velocities, exact pressure
/// difference with exponential forcing, exact quadrature for the individual
/// pressures and the volume fraction.  tau = 0 returns v_n bit-for-bit.
inline PrimitiveState exact_linear_solution(const LinearOperator& op,
                                            const PrimitiveState& v_n,
                                            const OdeParams& params, double tau) {
    const double total = params.m1 + params.m2;
    const double du_n = v_n.u1 - v_n.u2;
    const double relaxed = -std::expm1(-op.k_vel * tau);

    PrimitiveState out;
    out.u1 = v_n.u1 - params.m2 / total * du_n * relaxed;
    out.u2 = v_n.u2 + params.m1 / total * du_n * relaxed;

    const double beta = 2.0 * op.k_vel;     // decay rate of the velocity forcing
    const double big_k = op.kp1 + op.kp2;   // decay rate of the pressure gap
    // The friction heating lives in the fast velocity layer right after t_n,
    // so its 1/alpha divisor is anchored at the step start; anchoring it at
    // the midpoint costs one order of convergence across stiff transients.
    const double ku1_n = params.lambda_fric / (v_n.alpha1 * params.eos1.k_a);
    const double ku2_n = params.lambda_fric / ((1.0 - v_n.alpha1) * params.eos2.k_a);
    const double g1 = ku1_n * op.w2 * du_n * du_n;
    const double g2 = ku2_n * op.w1 * du_n * du_n;
    const double dp_n = v_n.p1 - v_n.p2;

    // integral of (p1 - p2) over [0, tau]
    const double gap_integral = dp_n * int_exp(big_k, tau) +
                                (g1 - g2) * int_exp_diff(beta, big_k, tau);
    const double forcing_integral = int_exp(beta, tau);

    out.p1 = v_n.p1 - op.kp1 * gap_integral + g1 * forcing_integral;
    out.p2 = v_n.p2 + op.kp2 * gap_integral + g2 * forcing_integral;
    out.alpha1 = v_n.alpha1 + params.nu_press * gap_integral;
    return out;
}

/// max_i |a_i - b_i| / (|a_i| + |b_i| + floor); a zero denominator counts
/// as zero change.
template <std::size_t N>
double relative_change(const std::array<double, N>& a, const std::array<double, N>& b,
                       double floor_value) {
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double den = std::abs(a[i]) + std::abs(b[i]) + floor_value;
        if (den > 0.0) worst = std::max(worst, std::abs(a[i] - b[i]) / den);
    }
    return worst;
}

// Indicator vector for the adaptive timestepping: pressure coupling rates,
// velocity-work terms, and the five source components, all at the
// linearisation state.
using CoeffVector = std::array<double, 9>;

inline CoeffVector coeff_vector_from_operator(const LinearOperator& op,
                                              const OdeParams& params) {
    const std::array<double, 5> f = detail::source_rhs_frozen(
        op.v_star, params, op.p_interface, op.u_interface);
    return {op.kp1,
            op.kp2,
            op.ku1 * (op.u_interface - op.v_star.u1),
            op.ku2 * (op.u_interface - op.v_star.u2),
            f[0], f[1], f[2], f[3], f[4]};
}

inline CoeffVector coeff_vector(const PrimitiveState& v_star, const OdeParams& params) {
    return coeff_vector_from_operator(build_linear_operator(v_star, params), params);
}

enum class DeltaNorm { Mean, Max };

struct SolverConfig {
    // Iteration cutoff for the midpoint refinement.  This gates step control,
    // not accuracy: once the endpoint stops moving at this level the frozen
    // coefficients are good enough for the delta test.  Fixed-step
    // convergence studies override it with a tight value.
    double r_max = 0.15;
    double eps_r = 1e-30;      // absolute floor in the iteration metric
    double delta_max = 0.5;    // linearisation validity tolerance
    // Relative floor for the coefficient comparison: component i of the
    // delta metric uses floor eps_delta * (largest |C_i| seen so far).
    // Keeps vanished coefficients from demanding resolution forever.
    double eps_delta = 1e-5;
    // Norm combining the per-component coefficient-change ratios into delta.
    // Mean lets the controller keep proposing across transients where a
    // single coefficient saturates its ratio; Max is the strict variant.
    DeltaNorm delta_norm = DeltaNorm::Mean;
    int k_max = 8;             // maximum midpoint iterations
    double safety = 0.8;       // timestep controller safety factor
    double eps_dt = 1e-14;     // controller division guard
    double growth_cap = 10.0;  // max timestep growth per accepted step
    // Below this delta the coefficients did not move at all (plateau /
    // equilibrium) and the controller formula is applied uncapped, letting
    // the run jump ahead as the uninterpreted formula would.
    double delta_plateau = 1e-8;
    double dt0 = 0.0;          // initial step; <= 0 means 1e-3 * (t_end - t0)
    double dt_min = 0.0;       // underflow guard; <= 0 means 1e-15 * (t_end - t0)
    bool warm_start = false;   // reuse the last endpoint iterate as the next guess
    // Components of the coefficient vector entering the delta metric.  The
    // default keeps the frozen pressure-operator data (kp1, kp2) and the
    // source entries free of exactly-integrated velocity factors (dp1/dt
    // under the uI = u1 closure, dalpha1/dt); entries that merely track the
    // exact velocity solution would flag every fast transient the integrator
    // already resolves in closed form.
    std::array<bool, 9> coeff_mask{true, true, false, false, false,
                                   false, true, false, true};
};

enum class RejectReason { Inadmissible, FloatingPointFault, MaxIterations, DeltaExceeded };

struct StepAccepted {
    PrimitiveState state;
    double dt_next;
    int iterations;
    double delta;
    CoeffVector coeff_end;
};

struct StepRejected {
    double dt_retry;  // exactly half the attempted dt
    RejectReason reason;
};

using StepOutcome = std::variant<StepAccepted, StepRejected>;

// Reference coefficients of the current step together with the per-component
// scale (running max along the trajectory) used to floor the delta metric.
struct CoeffReference {
    CoeffVector value;
    CoeffVector scale;
};

namespace detail {
inline double masked_relative_change(const CoeffVector& a, const CoeffVector& b,
                                     const CoeffVector& scale, const SolverConfig& cfg) {
    double worst = 0.0;
    double sum = 0.0;
    std::size_t active = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!cfg.coeff_mask[i]) continue;
        ++active;
        const double den = std::abs(a[i]) + std::abs(b[i]) + cfg.eps_delta * scale[i];
        if (den > 0.0) {
            const double ratio = std::abs(a[i] - b[i]) / den;
            worst = std::max(worst, ratio);
            sum += ratio;
        }
    }
    if (cfg.delta_norm == DeltaNorm::Max) return worst;
    return (active > 0) ? sum / static_cast<double>(active) : 0.0;
}

inline bool all_finite(const PrimitiveState& v) {
    for (double c : v.to_array())
        if (!std::isfinite(c)) return false;
    return true;
}
}  // namespace detail

/// One attempted step of size dt from v_n.  Iterates the midpoint
/// linearisation until the endpoint stops moving, then judges the frozen
/// coefficients against the step-start reference; any failure rejects with
/// dt/2.
inline StepOutcome attempt_step(const PrimitiveState& v_n, const CoeffReference& ref,
                                double dt, const OdeParams& params, const SolverConfig& cfg,
                                const PrimitiveState* warm_guess = nullptr) {
    const StepRejected halve_inadmissible{0.5 * dt, RejectReason::Inadmissible};
    const StepRejected halve_fp{0.5 * dt, RejectReason::FloatingPointFault};

    // Midpoint linearisation state: the previous iterate's solution evaluated
    // at t_n + dt/2.  The first sweep starts from the constant guess V_n.
    // Evaluating the trajectory at half time (rather than averaging the
    // endpoint states) keeps the frozen coefficients on the solution path
    // when a step jumps across a fast relaxation layer.
    PrimitiveState mid = v_n;
    if (cfg.warm_start && warm_guess != nullptr) {
        const std::array<double, 5> va = v_n.to_array();
        const std::array<double, 5> vb = warm_guess->to_array();
        std::array<double, 5> m;
        for (std::size_t i = 0; i < 5; ++i) m[i] = 0.5 * (va[i] + vb[i]);
        mid = PrimitiveState::from_array(m);
    }

    PrimitiveState previous_endpoint = v_n;
    PrimitiveState endpoint = v_n;
    CoeffVector c_mid{};
    CoeffVector c_end{};
    bool converged = false;
    int iterations = 0;

    for (int k = 1; k <= cfg.k_max; ++k) {
        iterations = k;
        LinearOperator op;
        try {
            op = build_linear_operator(mid, params);
        } catch (const InadmissibleState&) {
            return detail::all_finite(mid) ? halve_inadmissible : halve_fp;
        }
        c_mid = coeff_vector_from_operator(op, params);

        endpoint = exact_linear_solution(op, v_n, params, dt);
        if (!detail::all_finite(endpoint)) return halve_fp;
        const Admissibility adm = admissible(endpoint, params);
        if (!adm.ok) return halve_inadmissible;

        const double r =
            relative_change(endpoint.to_array(), previous_endpoint.to_array(), cfg.eps_r);
        previous_endpoint = endpoint;
        if (r <= cfg.r_max) {
            converged = true;
            break;
        }
        mid = exact_linear_solution(op, v_n, params, 0.5 * dt);
        if (!detail::all_finite(mid)) return halve_fp;
    }

    // Treat iteration-count exhaustion like a failed admissibility test.
    if (!converged) return StepRejected{0.5 * dt, RejectReason::MaxIterations};

    try {
        c_end = coeff_vector(endpoint, params);
    } catch (const InadmissibleState&) {
        return halve_inadmissible;
    }

    const double delta_mid = detail::masked_relative_change(c_mid, ref.value, ref.scale, cfg);
    const double delta_end = detail::masked_relative_change(c_end, ref.value, ref.scale, cfg);
    const double delta = std::max(delta_mid, delta_end);
    if (delta > cfg.delta_max) return StepRejected{0.5 * dt, RejectReason::DeltaExceeded};

    double factor = cfg.safety * cfg.delta_max / (delta + cfg.eps_dt);
    if (delta > cfg.delta_plateau) factor = std::min(factor, cfg.growth_cap);
    return StepAccepted{endpoint, dt * factor, iterations, delta, c_end};
}

struct TrajectoryPoint {
    double t;
    PrimitiveState state;
    double dt;       // size of the accepted step ending here (0 for the start)
    int iterations;  // midpoint iterations of that step
};

struct IntegrationResult {
    std::vector<TrajectoryPoint> trajectory;
    long accepted = 0;
    long rejected = 0;
    std::vector<long> iteration_histogram;  // index = iteration count
};

class StepSizeUnderflow : public SolverError {
public:
    StepSizeUnderflow(double t_last, const PrimitiveState& last, double dt)
        : SolverError("timestep underflow at t = " + std::to_string(t_last) +
                      " s (dt = " + std::to_string(dt) +
                      "), last state alpha1 = " + std::to_string(last.alpha1)),
          t_last_good(t_last),
          last_good(last) {}
    double t_last_good;
    PrimitiveState last_good;
};

/// March from t0 to t_end with the adaptive controller, halving rejected
/// steps and clamping the final step to land exactly on t_end.  Callers that
/// only need the end state (the finite-volume layer runs one integration per
/// cell per step) pass record_trajectory = false; the result then holds just
/// the initial and final points.
inline IntegrationResult integrate(const PrimitiveState& v_0, double t0, double t_end,
                                   const OdeParams& params, const SolverConfig& cfg,
                                   bool record_trajectory = true) {
    if (!(t_end > t0)) throw ConfigError("integrate: t_end must exceed t0");
    const Admissibility adm0 = admissible(v_0, params);
    if (!adm0.ok) throw InadmissibleState(std::string("integrate: initial state ") + adm0.reason);

    const double horizon = t_end - t0;
    double dt = (cfg.dt0 > 0.0) ? cfg.dt0 : 1e-3 * horizon;
    dt = std::min(dt, horizon);
    const double dt_min = (cfg.dt_min > 0.0) ? cfg.dt_min : 1e-15 * horizon;

    IntegrationResult result;
    if (record_trajectory) {
        result.iteration_histogram.assign(static_cast<std::size_t>(cfg.k_max) + 1, 0);
        result.trajectory.push_back({t0, v_0, 0.0, 0});
    }

    PrimitiveState v = v_0;
    CoeffReference ref;
    ref.value = coeff_vector(v_0, params);
    for (std::size_t i = 0; i < ref.scale.size(); ++i) ref.scale[i] = std::abs(ref.value[i]);

    double t = t0;
    PrimitiveState last_endpoint = v_0;
    bool have_warm = false;
    while (t < t_end) {
        const double remaining = t_end - t;
        const double dt_try = std::min(dt, remaining);
        const StepOutcome outcome =
            attempt_step(v, ref, dt_try, params, cfg, have_warm ? &last_endpoint : nullptr);
        if (const auto* acc = std::get_if<StepAccepted>(&outcome)) {
            t = (dt_try == remaining) ? t_end : t + dt_try;
            v = acc->state;
            ref.value = acc->coeff_end;
            for (std::size_t i = 0; i < ref.scale.size(); ++i)
                ref.scale[i] = std::max(ref.scale[i], std::abs(ref.value[i]));
            dt = acc->dt_next;
            ++result.accepted;
            if (record_trajectory) {
                const auto bin = static_cast<std::size_t>(
                    std::min(acc->iterations, cfg.k_max));
                result.iteration_histogram[bin]++;
                result.trajectory.push_back({t, v, dt_try, acc->iterations});
            }
            last_endpoint = v;
            have_warm = false;
        } else {
            const auto& rej = std::get<StepRejected>(outcome);
            ++result.rejected;
            dt = rej.dt_retry;
            if (dt < dt_min) throw StepSizeUnderflow(t, v, dt);
            last_endpoint = v;  // retried attempts restart from v_n
            have_warm = cfg.warm_start;
        }
    }
    if (!record_trajectory) result.trajectory.push_back({t_end, v, 0.0, 0});
    return result;
}

/// Single step of fixed size: midpoint iteration without the acceptance
/// logic.  Used by the convergence study.
inline PrimitiveState fixed_step(const PrimitiveState& v_n, double dt,
                                 const OdeParams& params, const SolverConfig& cfg) {
    PrimitiveState mid = v_n;
    PrimitiveState previous_endpoint = v_n;
    PrimitiveState endpoint = v_n;
    for (int k = 1; k <= cfg.k_max; ++k) {
        const LinearOperator op = build_linear_operator(mid, params);
        endpoint = exact_linear_solution(op, v_n, params, dt);
        if (!detail::all_finite(endpoint))
            throw SolverError("fixed_step: non-finite state");
        const Admissibility adm = admissible(endpoint, params);
        if (!adm.ok) throw InadmissibleState(std::string("fixed_step: ") + adm.reason);
        const double r =
            relative_change(endpoint.to_array(), previous_endpoint.to_array(), cfg.eps_r);
        previous_endpoint = endpoint;
        if (r <= cfg.r_max) break;
        mid = exact_linear_solution(op, v_n, params, 0.5 * dt);
        if (!detail::all_finite(mid)) throw SolverError("fixed_step: non-finite state");
    }
    return endpoint;
}

inline PrimitiveState integrate_fixed(const PrimitiveState& v_0, double t0, double t_end,
                                      long n_steps, const OdeParams& params,
                                      const SolverConfig& cfg) {
    if (n_steps < 1) throw ConfigError("integrate_fixed: need at least one step");
    const double dt = (t_end - t0) / static_cast<double>(n_steps);
    PrimitiveState v = v_0;
    for (long i = 0; i < n_steps; ++i) v = fixed_step(v, dt, params, cfg);
    return v;
}

}  // namespace bnrelax
