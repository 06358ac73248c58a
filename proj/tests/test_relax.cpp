#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bnrelax/relax.hpp"

using namespace bnrelax;

namespace {

OdeParams a1_params() {
    return {1.0, 4.0, EosPhase(6.0, 0.0), EosPhase(1.4, 0.0), 1e9, 10.0,
            InterfaceClosure::Simple};
}

PrimitiveState a1_state() { return {-5.0, 5.0, 0.1, 20.0, 0.9}; }

OdeParams a2_params() {
    return {780.0, 0.22, EosPhase(6.0, 100.0), EosPhase(1.4, 0.0), 1e9, 10.0,
            InterfaceClosure::Simple};
}

PrimitiveState a2_state() { return {0.0, 0.0, 2.0e8, 1.0, 0.4}; }

double mixture_momentum(const PrimitiveState& v, const OdeParams& p) {
    return p.m1 * v.u1 + p.m2 * v.u2;
}

double mixture_energy(const PrimitiveState& v, const OdeParams& p) {
    const double a2 = 1.0 - v.alpha1;
    return v.alpha1 * phase_internal_energy(v.p1, p.eos1) +
           a2 * phase_internal_energy(v.p2, p.eos2) +
           0.5 * p.m1 * v.u1 * v.u1 + 0.5 * p.m2 * v.u2 * v.u2;
}

}  // namespace

TEST_CASE("source_rhs vanishes at the equilibrium fixed point") {
    const OdeParams params = a1_params();
    const PrimitiveState v{3.0, 3.0, 7.0, 7.0, 0.4};
    for (double f : source_rhs(v, params)) CHECK(f == 0.0);
}

TEST_CASE("source_rhs on the A1 initial data") {
    const OdeParams params = a1_params();
    const auto f = source_rhs(a1_state(), params);
    // direct substitution into the five equations, Simple closure pI = 20,
    // uI = -5, k1a = 0.2, k2a = 2.5
    CHECK(f[0] == doctest::Approx(1e10).epsilon(1e-14));
    CHECK(f[1] == doctest::Approx(-2.5e9).epsilon(1e-14));
    CHECK(f[2] == doctest::Approx(10.0 * (20.0 + 0.2 * 0.1) / (0.9 * 0.2) * 19.9).epsilon(1e-13));
    CHECK(f[3] == doctest::Approx(10.0 * (20.0 + 2.5 * 20.0) / (0.1 * 2.5) * (-19.9) +
                                  1e9 * (-10.0) / (0.1 * 2.5) * (-10.0)).epsilon(1e-13));
    CHECK(f[4] == doctest::Approx(-199.0).epsilon(1e-14));
}

TEST_CASE("velocity_exact: initial condition, symmetry, decay, steady state") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();

    SUBCASE("tau = 0 returns the initial velocities exactly") {
        const auto u = velocity_exact(v0, params, 0.0);
        CHECK(u[0] == v0.u1);
        CHECK(u[1] == v0.u2);
    }
    SUBCASE("equal velocities stay put for any tau") {
        const PrimitiveState eq{2.5, 2.5, 0.1, 20.0, 0.9};
        for (double tau : {0.0, 1e-12, 1e-6, 1.0}) {
            const auto u = velocity_exact(eq, params, tau);
            CHECK(u[0] == 2.5);
            CHECK(u[1] == 2.5);
        }
    }
    SUBCASE("long-time limit is the momentum-weighted mean") {
        const auto u = velocity_exact(v0, params, 1.0);
        CHECK(u[0] == doctest::Approx(3.0).epsilon(1e-14));
        CHECK(u[1] == doctest::Approx(3.0).epsilon(1e-14));
    }
    SUBCASE("velocity difference decays as exp(-k_vel tau)") {
        for (double tau : {1e-10, 5e-10, 1e-9}) {
            const auto u = velocity_exact(v0, params, tau);
            const double want = -10.0 * std::exp(-1.25e9 * tau);
            CHECK(u[0] - u[1] == doctest::Approx(want).epsilon(1e-13));
        }
    }
    SUBCASE("mixture momentum is invariant") {
        std::mt19937_64 rng(99u);
        std::uniform_real_distribution<double> u_vel(-100.0, 100.0);
        std::uniform_real_distribution<double> u_tau(0.0, 1e-8);
        for (int trial = 0; trial < 300; ++trial) {
            PrimitiveState v = a1_state();
            v.u1 = u_vel(rng);
            v.u2 = u_vel(rng);
            const auto u = velocity_exact(v, params, u_tau(rng));
            const double before = mixture_momentum(v, params);
            const double after = params.m1 * u[0] + params.m2 * u[1];
            CHECK(std::abs(after - before) <=
                  1e-12 * std::max(std::abs(before), params.m1 * std::abs(v.u1) +
                                                         params.m2 * std::abs(v.u2)));
        }
    }
}

TEST_CASE("build_linear_operator coefficients") {
    SUBCASE("all rates vanish with lambda = nu = 0") {
        OdeParams params = a1_params();
        params.lambda_fric = 0.0;
        params.nu_press = 0.0;
        const LinearOperator op = build_linear_operator(a1_state(), params);
        CHECK(op.k_vel == 0.0);
        CHECK(op.kp1 == 0.0);
        CHECK(op.kp2 == 0.0);
        CHECK(op.ku1 == 0.0);
        CHECK(op.ku2 == 0.0);
    }
    SUBCASE("A1 values at the initial state") {
        const LinearOperator op = build_linear_operator(a1_state(), a1_params());
        CHECK(op.ku1 == doctest::Approx(1e9 / 0.18).epsilon(1e-14));
        CHECK(op.kp1 == doctest::Approx(10.0 * (20.0 + 0.2 * 0.1) / 0.18).epsilon(1e-14));
        CHECK(op.kp2 == doctest::Approx(10.0 * (20.0 + 2.5 * 20.0) / 0.25).epsilon(1e-14));
        CHECK(op.k_vel == doctest::Approx(1.25e9).epsilon(1e-15));
        CHECK(op.u_inf == doctest::Approx(3.0).epsilon(1e-15));
    }
    SUBCASE("inadmissible linearisation state throws") {
        PrimitiveState bad = a1_state();
        bad.alpha1 = 1.2;
        CHECK_THROWS_AS(build_linear_operator(bad, a1_params()), InadmissibleState);
    }
}

TEST_CASE("exact_linear_solution basics") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();
    const LinearOperator op = build_linear_operator(v0, params);

    SUBCASE("tau = 0 reproduces the initial state bit-for-bit") {
        const PrimitiveState out = exact_linear_solution(op, v0, params, 0.0);
        CHECK(out.u1 == v0.u1);
        CHECK(out.u2 == v0.u2);
        CHECK(out.p1 == v0.p1);
        CHECK(out.p2 == v0.p2);
        CHECK(out.alpha1 == v0.alpha1);
    }
    SUBCASE("equilibrium is a bit-exact fixed point") {
        const PrimitiveState eq{1.0, 1.0, 5.0, 5.0, 0.3};
        const LinearOperator op_eq = build_linear_operator(eq, params);
        for (double tau : {1e-9, 1e-3, 1.0}) {
            const PrimitiveState out = exact_linear_solution(op_eq, eq, params, tau);
            CHECK(out.u1 == eq.u1);
            CHECK(out.u2 == eq.u2);
            CHECK(out.p1 == eq.p1);
            CHECK(out.p2 == eq.p2);
            CHECK(out.alpha1 == eq.alpha1);
        }
    }
    SUBCASE("lambda = 0 with equal pressures is constant in tau") {
        OdeParams frozen = params;
        frozen.lambda_fric = 0.0;
        const PrimitiveState v{-2.0, 3.0, 6.0, 6.0, 0.7};
        const LinearOperator op_f = build_linear_operator(v, frozen);
        const PrimitiveState out = exact_linear_solution(op_f, v, frozen, 0.37);
        CHECK(out.u1 == v.u1);
        CHECK(out.u2 == v.u2);
        CHECK(out.p1 == doctest::Approx(v.p1).epsilon(1e-15));
        CHECK(out.p2 == doctest::Approx(v.p2).epsilon(1e-15));
        CHECK(out.alpha1 == doctest::Approx(v.alpha1).epsilon(1e-15));
    }
}

TEST_CASE("exact_linear_solution solves its own affine problem (FD residual)") {
    // Central finite difference of the closed form against the frozen-
    // coefficient right-hand side, refined once to confirm O(h^2).
    std::mt19937_64 rng(314159u);
    std::uniform_real_distribution<double> u_alpha(0.2, 0.8);
    std::uniform_real_distribution<double> u_vel(-10.0, 10.0);
    std::uniform_real_distribution<double> u_p(0.5, 30.0);
    std::uniform_real_distribution<double> u_rate(10.0, 2e3);

    for (int trial = 0; trial < 100; ++trial) {
        OdeParams params = a1_params();
        params.lambda_fric = u_rate(rng);
        params.nu_press = u_rate(rng) * 1e-3;
        const PrimitiveState v_n{u_vel(rng), u_vel(rng), u_p(rng), u_p(rng), u_alpha(rng)};
        PrimitiveState v_star = v_n;
        v_star.p1 = u_p(rng);
        v_star.alpha1 = u_alpha(rng);
        const LinearOperator op = build_linear_operator(v_star, params);

        const double tau = 1e-3;
        const auto affine_rhs = [&](const PrimitiveState& v, double t) {
            // forcing coefficients of the closed form: 1/alpha anchored at
            // the step-start state, uI weights and pressure rates frozen in
            // the operator
            const double du_n = v_n.u1 - v_n.u2;
            const double ku1_n = params.lambda_fric / (v_n.alpha1 * params.eos1.k_a);
            const double ku2_n = params.lambda_fric / ((1.0 - v_n.alpha1) * params.eos2.k_a);
            const double q2 = std::exp(-2.0 * op.k_vel * t);
            std::array<double, 5> f;
            f[0] = params.lambda_fric / params.m1 * (v.u2 - v.u1);
            f[1] = params.lambda_fric / params.m2 * (v.u1 - v.u2);
            f[2] = op.kp1 * (v.p2 - v.p1) + ku1_n * op.w2 * du_n * du_n * q2;
            f[3] = op.kp2 * (v.p1 - v.p2) + ku2_n * op.w1 * du_n * du_n * q2;
            f[4] = params.nu_press * (v.p1 - v.p2);
            return f;
        };

        const auto residual = [&](double h) {
            const PrimitiveState mid = exact_linear_solution(op, v_n, params, tau);
            const PrimitiveState lo = exact_linear_solution(op, v_n, params, tau - h);
            const PrimitiveState hi = exact_linear_solution(op, v_n, params, tau + h);
            const auto rhs = affine_rhs(mid, tau);
            const auto alo = lo.to_array();
            const auto ahi = hi.to_array();
            double rhs_inf = 0.0;
            for (double r : rhs) rhs_inf = std::max(rhs_inf, std::abs(r));
            double worst = 0.0;
            for (std::size_t i = 0; i < 5; ++i) {
                const double fd = (ahi[i] - alo[i]) / (2.0 * h);
                const double scale = std::abs(rhs[i]) + 1e-2 * rhs_inf + 1e-300;
                worst = std::max(worst, std::abs(fd - rhs[i]) / scale);
            }
            return worst;
        };

        const double e1 = residual(1e-5);
        const double e2 = residual(5e-6);
        CHECK(e1 < 5e-2);
        // quadratic decay, with an absolute floor for round-off noise
        CHECK(e2 <= 0.35 * e1 + 1e-9);
    }
}

TEST_CASE("linearised pressure gap decays monotonically (lambda = 0)") {
    OdeParams params = a1_params();
    params.lambda_fric = 0.0;
    const PrimitiveState v{1.0, 1.0, 18.0, 3.0, 0.6};
    const LinearOperator op = build_linear_operator(v, params);
    double prev = std::abs(v.p1 - v.p2);
    for (double tau = 1e-5; tau < 1.0; tau *= 3.0) {
        const PrimitiveState out = exact_linear_solution(op, v, params, tau);
        const double gap = std::abs(out.p1 - out.p2);
        CHECK(gap <= prev * (1.0 + 1e-14));
        prev = gap;
    }
}

TEST_CASE("relative_change") {
    const std::array<double, 3> a{1.0, 2.0, -3.0};
    CHECK(relative_change(a, a, 0.0) == 0.0);
    CHECK(relative_change(std::array<double, 1>{1.0}, std::array<double, 1>{0.0}, 0.0) == 1.0);
    CHECK(relative_change(std::array<double, 2>{1.0, 2.0}, std::array<double, 2>{1.0, 3.0},
                          1e-30) == doctest::Approx(0.2).epsilon(1e-14));
    // zero denominator counts as no change
    CHECK(relative_change(std::array<double, 1>{0.0}, std::array<double, 1>{0.0}, 0.0) == 0.0);
}

TEST_CASE("coeff_vector") {
    const OdeParams params = a1_params();
    SUBCASE("equilibrium: source block zero, couplings finite") {
        const PrimitiveState eq{2.0, 2.0, 9.0, 9.0, 0.5};
        const CoeffVector c = coeff_vector(eq, params);
        for (std::size_t i = 4; i < 9; ++i) CHECK(c[i] == 0.0);
        for (std::size_t i = 0; i < 4; ++i) CHECK(std::isfinite(c[i]));
        CHECK(c[0] > 0.0);
        CHECK(c[1] > 0.0);
    }
    SUBCASE("kp components are blind to the velocity variables") {
        PrimitiveState va = a1_state();
        PrimitiveState vb = va;
        vb.u1 = 17.0;
        vb.u2 = -4.0;
        const CoeffVector ca = coeff_vector(va, params);
        const CoeffVector cb = coeff_vector(vb, params);
        CHECK(ca[0] == cb[0]);
        CHECK(ca[1] == cb[1]);
    }
    SUBCASE("first component equals the operator's kp1 on A1") {
        const CoeffVector c = coeff_vector(a1_state(), params);
        const LinearOperator op = build_linear_operator(a1_state(), params);
        CHECK(c[0] == op.kp1);
        CHECK(c[0] == doctest::Approx(1112.2222222222222).epsilon(1e-13));
    }
}

TEST_CASE("admissible") {
    const OdeParams params = a1_params();
    CHECK(admissible(a1_state(), params).ok);
    SUBCASE("alpha bound is strict") {
        PrimitiveState v = a1_state();
        v.alpha1 = 1.0;
        CHECK_FALSE(admissible(v, params).ok);
    }
    SUBCASE("negative internal energy fails") {
        OdeParams stiffened = params;
        stiffened.eos1 = EosPhase(2.0, 3.0);
        PrimitiveState v = a1_state();
        v.p1 = -2.0 * 3.0 - 1.0;  // below -gamma1 pi1
        CHECK_FALSE(admissible(v, stiffened).ok);
    }
    SUBCASE("non-finite component fails") {
        PrimitiveState v = a1_state();
        v.p2 = std::nan("");
        CHECK_FALSE(admissible(v, params).ok);
    }
}

TEST_CASE("attempt_step at the equilibrium fixed point") {
    const OdeParams params = a1_params();
    const PrimitiveState eq{3.0, 3.0, 12.0, 12.0, 0.55};
    CoeffReference ref;
    ref.value = coeff_vector(eq, params);
    for (std::size_t i = 0; i < 9; ++i) ref.scale[i] = std::abs(ref.value[i]);
    SolverConfig cfg;
    const StepOutcome out = attempt_step(eq, ref, 1e-3, params, cfg);
    REQUIRE(std::holds_alternative<StepAccepted>(out));
    const auto& acc = std::get<StepAccepted>(out);
    CHECK(acc.iterations == 1);
    CHECK(acc.state.u1 == eq.u1);
    CHECK(acc.state.p1 == eq.p1);
    CHECK(acc.state.alpha1 == eq.alpha1);
    CHECK(acc.delta == 0.0);
    // on a coefficient plateau the controller proposal is uncapped
    CHECK(acc.dt_next >= 1e-3 * cfg.growth_cap);
}

TEST_CASE("attempt_step rejections halve the step exactly") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();
    CoeffReference ref;
    ref.value = coeff_vector(v0, params);
    for (std::size_t i = 0; i < 9; ++i) ref.scale[i] = std::abs(ref.value[i]);
    SolverConfig cfg;
    cfg.delta_max = 0.5;
    const double dt = 1.0;  // absurdly large across the whole transient
    const StepOutcome out = attempt_step(v0, ref, dt, params, cfg);
    REQUIRE(std::holds_alternative<StepRejected>(out));
    CHECK(std::get<StepRejected>(out).dt_retry == 0.5 * dt);
}

TEST_CASE("attempt_step accepts and grows when coefficients barely move") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();
    CoeffReference ref;
    ref.value = coeff_vector(v0, params);
    for (std::size_t i = 0; i < 9; ++i) ref.scale[i] = std::abs(ref.value[i]);
    SolverConfig cfg;
    const double dt = 1e-12;
    const StepOutcome out = attempt_step(v0, ref, dt, params, cfg);
    REQUIRE(std::holds_alternative<StepAccepted>(out));
    CHECK(std::get<StepAccepted>(out).dt_next > dt);
}

TEST_CASE("integrate on A1: invariants of the accepted trajectory") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();
    SolverConfig cfg;
    cfg.delta_max = 0.5;
    const IntegrationResult res = integrate(v0, 0.0, 1e-3, params, cfg);

    CHECK(res.accepted >= 1);
    CHECK(res.trajectory.front().t == 0.0);
    CHECK(res.trajectory.back().t == 1e-3);

    const double mom0 = mixture_momentum(v0, params);
    double t_prev = -1.0;
    for (const TrajectoryPoint& p : res.trajectory) {
        CHECK(p.t > t_prev);
        t_prev = p.t;
        CHECK(admissible(p.state, params).ok);
        CHECK(std::abs(mixture_momentum(p.state, params) - mom0) <= 1e-12 * std::abs(mom0));
    }
    // velocities fully relaxed at the end
    CHECK(res.trajectory.back().state.u1 == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(res.trajectory.back().state.u2 == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("integrate is deterministic") {
    const OdeParams params = a1_params();
    SolverConfig cfg;
    const IntegrationResult r1 = integrate(a1_state(), 0.0, 1e-3, params, cfg);
    const IntegrationResult r2 = integrate(a1_state(), 0.0, 1e-3, params, cfg);
    REQUIRE(r1.trajectory.size() == r2.trajectory.size());
    for (std::size_t i = 0; i < r1.trajectory.size(); ++i) {
        CHECK(r1.trajectory[i].t == r2.trajectory[i].t);
        CHECK(r1.trajectory[i].state.p1 == r2.trajectory[i].state.p1);
        CHECK(r1.trajectory[i].state.alpha1 == r2.trajectory[i].state.alpha1);
    }
}

TEST_CASE("integrate reports timestep underflow with the last good state") {
    // A state pinned against the alpha = 1 wall with a strong positive
    // pressure gap: every step lands outside (0,1), halving cannot help.
    OdeParams params = a1_params();
    params.nu_press = 1e9;
    params.lambda_fric = 0.0;
    const PrimitiveState v0{0.0, 0.0, 1e3 + 1.0, 1.0, 1.0 - 1e-15};
    CHECK_THROWS_AS(integrate(v0, 0.0, 1.0, params, SolverConfig{}), StepSizeUnderflow);
}

TEST_CASE("mixture energy drift shrinks with the linearisation tolerance") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();
    const double e0 = mixture_energy(v0, params);
    const auto drift = [&](double delta_max) {
        SolverConfig cfg;
        cfg.delta_max = delta_max;
        const IntegrationResult res = integrate(v0, 0.0, 1e-3, params, cfg);
        return std::abs(mixture_energy(res.trajectory.back().state, params) - e0);
    };
    const double loose = drift(0.9);
    const double tight = drift(0.05);
    CHECK(tight <= loose + 1e-12 * e0);
}

TEST_CASE("fixed-step mode converges at second order on A1") {
    const OdeParams params = a1_params();
    const PrimitiveState v0 = a1_state();
    SolverConfig cfg;
    cfg.r_max = 1e-12;  // iterate the midpoint to the bottom for order studies

    // reference: tight adaptive run of the same scheme is not independent;
    // use a very fine fixed-step solution as the limit object here (the
    // cross-method comparison against the implicit reference lives in the
    // acceptance suite)
    const PrimitiveState ref = integrate_fixed(v0, 0.0, 1e-3, 65536, params, cfg);
    std::vector<double> dts, errs_p1, errs_a1;
    for (long n : {64L, 128L, 256L, 512L, 1024L}) {
        const PrimitiveState got = integrate_fixed(v0, 0.0, 1e-3, n, params, cfg);
        dts.push_back(1e-3 / static_cast<double>(n));
        errs_p1.push_back(std::abs(got.p1 - ref.p1) / std::abs(ref.p1));
        errs_a1.push_back(std::abs(got.alpha1 - ref.alpha1) / std::abs(ref.alpha1));
    }
    // log-log slope by hand
    const auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            sx += std::log(x[i]);
            sy += std::log(y[i]);
            sxx += std::log(x[i]) * std::log(x[i]);
            sxy += std::log(x[i]) * std::log(y[i]);
        }
        return (n * sxy - sx * sy) / (n * sxx - sx * sx);
    };
    CHECK(slope(dts, errs_p1) >= 1.8);
    CHECK(slope(dts, errs_a1) >= 1.8);
}

TEST_CASE("warm-started retries converge to the same physics") {
    const OdeParams params = a1_params();
    SolverConfig warm;
    warm.warm_start = true;
    const IntegrationResult base = integrate(a1_state(), 0.0, 1e-3, params, SolverConfig{});
    const IntegrationResult warmed = integrate(a1_state(), 0.0, 1e-3, params, warm);
    const auto& a = base.trajectory.back().state;
    const auto& b = warmed.trajectory.back().state;
    CHECK(b.p1 == doctest::Approx(a.p1).epsilon(1e-2));
    CHECK(b.alpha1 == doctest::Approx(a.alpha1).epsilon(1e-2));
    CHECK(warmed.accepted >= 1);
}
