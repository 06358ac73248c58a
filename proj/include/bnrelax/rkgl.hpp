#pragma once

// Three-stage Gauss-Legendre collocation Runge-Kutta method (order 6, fully
// implicit, A-stable), used as the correctness reference for the relaxation
// solver.  Stage systems are solved by simplified Newton with a
// finite-difference Jacobian; adaptive runs use step doubling.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "bnrelax/eos.hpp"
#include "bnrelax/relax.hpp"

namespace bnrelax {

struct GaussLegendreTableau {
    std::array<std::array<double, 3>, 3> a;
    std::array<double, 3> b;
    std::array<double, 3> c;
};

inline const GaussLegendreTableau& rkgl3_tableau() {
    static const GaussLegendreTableau t = [] {
        const double s15 = std::sqrt(15.0);
        GaussLegendreTableau tab;
        tab.c = {0.5 - s15 / 10.0, 0.5, 0.5 + s15 / 10.0};
        tab.b = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
        tab.a = {{{5.0 / 36.0, 2.0 / 9.0 - s15 / 15.0, 5.0 / 36.0 - s15 / 30.0},
                  {5.0 / 36.0 + s15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - s15 / 24.0},
                  {5.0 / 36.0 + s15 / 30.0, 2.0 / 9.0 + s15 / 15.0, 5.0 / 36.0}}};
        return tab;
    }();
    return t;
}

struct NewtonSettings {
    double tolerance = 1e-13;  // relative stage-residual tolerance
    int max_iterations = 30;
};

namespace detail {

// Dense LU with partial pivoting, row-major n x n.
inline bool lu_factor(std::vector<double>& m, std::vector<int>& piv, int n) {
    piv.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) piv[static_cast<std::size_t>(i)] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        double best_abs = std::abs(m[static_cast<std::size_t>(col * n + col)]);
        for (int row = col + 1; row < n; ++row) {
            const double v = std::abs(m[static_cast<std::size_t>(row * n + col)]);
            if (v > best_abs) {
                best_abs = v;
                best = row;
            }
        }
        if (best_abs == 0.0) return false;
        if (best != col) {
            std::swap(piv[static_cast<std::size_t>(col)], piv[static_cast<std::size_t>(best)]);
            for (int j = 0; j < n; ++j)
                std::swap(m[static_cast<std::size_t>(col * n + j)],
                          m[static_cast<std::size_t>(best * n + j)]);
        }
        const double d = m[static_cast<std::size_t>(col * n + col)];
        for (int row = col + 1; row < n; ++row) {
            const double f = m[static_cast<std::size_t>(row * n + col)] / d;
            m[static_cast<std::size_t>(row * n + col)] = f;
            for (int j = col + 1; j < n; ++j)
                m[static_cast<std::size_t>(row * n + j)] -=
                    f * m[static_cast<std::size_t>(col * n + j)];
        }
    }
    return true;
}

inline void lu_solve(const std::vector<double>& m, const std::vector<int>& piv, int n,
                     std::vector<double>& rhs) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(piv[static_cast<std::size_t>(i)])];
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j)
            x[static_cast<std::size_t>(i)] -=
                m[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j)
            x[static_cast<std::size_t>(i)] -=
                m[static_cast<std::size_t>(i * n + j)] * x[static_cast<std::size_t>(j)];
        x[static_cast<std::size_t>(i)] /= m[static_cast<std::size_t>(i * n + i)];
    }
    rhs = x;
}

}  // namespace detail

/// One implicit Gauss-Legendre step for a generic autonomous system of
/// dimension N.  Returns nullopt when the Newton iteration fails to converge.
template <std::size_t N, class Rhs>
std::optional<std::array<double, N>> rkgl3_generic_step(const Rhs& rhs,
                                                        const std::array<double, N>& y_n,
                                                        double dt,
                                                        const NewtonSettings& settings) {
    const GaussLegendreTableau& tab = rkgl3_tableau();
    constexpr int n_big = static_cast<int>(3 * N);

    double y_scale = 0.0;
    for (double c : y_n) y_scale = std::max(y_scale, std::abs(c));
    std::array<double, N> scale;
    for (std::size_t i = 0; i < N; ++i)
        scale[i] = std::max(std::abs(y_n[i]), 1e-8 * y_scale) + 1e-300;

    // Finite-difference Jacobian at y_n (central differences).
    std::array<std::array<double, N>, N> jac{};
    {
        const double sqrt_eps = 1.4901161193847656e-08;
        for (std::size_t j = 0; j < N; ++j) {
            const double h = sqrt_eps * std::max(std::abs(y_n[j]), 1e-3 * y_scale + 1e-300);
            std::array<double, N> yp = y_n;
            std::array<double, N> ym = y_n;
            yp[j] += h;
            ym[j] -= h;
            const std::array<double, N> fp = rhs(yp);
            const std::array<double, N> fm = rhs(ym);
            for (std::size_t i = 0; i < N; ++i) jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }

    // M = I - dt (A (x) J)
    std::vector<double> m(static_cast<std::size_t>(n_big * n_big), 0.0);
    for (int si = 0; si < 3; ++si)
        for (int sj = 0; sj < 3; ++sj)
            for (std::size_t i = 0; i < N; ++i)
                for (std::size_t j = 0; j < N; ++j) {
                    const int row = si * static_cast<int>(N) + static_cast<int>(i);
                    const int col = sj * static_cast<int>(N) + static_cast<int>(j);
                    double v = -dt * tab.a[static_cast<std::size_t>(si)][static_cast<std::size_t>(sj)] * jac[i][j];
                    if (row == col) v += 1.0;
                    m[static_cast<std::size_t>(row * n_big + col)] = v;
                }
    std::vector<int> piv;
    if (!detail::lu_factor(m, piv, n_big)) return std::nullopt;

    std::array<std::array<double, N>, 3> stages;
    stages.fill(y_n);
    std::array<std::array<double, N>, 3> f_stages{};

    bool converged = false;
    double prev_update = std::numeric_limits<double>::infinity();
    for (int it = 0; it < settings.max_iterations; ++it) {
        for (int s = 0; s < 3; ++s) f_stages[static_cast<std::size_t>(s)] = rhs(stages[static_cast<std::size_t>(s)]);
        std::vector<double> residual(static_cast<std::size_t>(n_big));
        double res_norm = 0.0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t i = 0; i < N; ++i) {
                double acc = stages[static_cast<std::size_t>(s)][i] - y_n[i];
                for (int q = 0; q < 3; ++q)
                    acc -= dt * tab.a[static_cast<std::size_t>(s)][static_cast<std::size_t>(q)] * f_stages[static_cast<std::size_t>(q)][i];
                residual[static_cast<std::size_t>(s * static_cast<int>(N) + static_cast<int>(i))] = -acc;
                res_norm = std::max(res_norm, std::abs(acc) / scale[i]);
            }
        if (res_norm <= settings.tolerance) {
            converged = true;
            break;
        }
        detail::lu_solve(m, piv, n_big, residual);
        double update_norm = 0.0;
        for (int s = 0; s < 3; ++s)
            for (std::size_t i = 0; i < N; ++i) {
                const double d = residual[static_cast<std::size_t>(s * static_cast<int>(N) + static_cast<int>(i))];
                stages[static_cast<std::size_t>(s)][i] += d;
                update_norm = std::max(update_norm, std::abs(d) / scale[i]);
            }
        // Round-off stagnation: successive corrections at machine noise.
        if (update_norm <= 1e-15 && prev_update <= 1e-15) {
            converged = true;
            break;
        }
        prev_update = update_norm;
    }
    if (!converged) return std::nullopt;

    for (int s = 0; s < 3; ++s) f_stages[static_cast<std::size_t>(s)] = rhs(stages[static_cast<std::size_t>(s)]);
    std::array<double, N> y_next = y_n;
    for (std::size_t i = 0; i < N; ++i)
        for (int s = 0; s < 3; ++s)
            y_next[i] += dt * tab.b[static_cast<std::size_t>(s)] * f_stages[static_cast<std::size_t>(s)][i];
    for (double c : y_next)
        if (!std::isfinite(c)) return std::nullopt;
    return y_next;
}

/// One RKGL3 step of the relaxation system.
inline std::optional<PrimitiveState> rkgl3_step(const PrimitiveState& v_n, double dt,
                                                const OdeParams& params,
                                                const NewtonSettings& settings = {}) {
    const auto rhs = [&params](const std::array<double, 5>& y) {
        return source_rhs(PrimitiveState::from_array(y), params);
    };
    const auto next = rkgl3_generic_step<5>(rhs, v_n.to_array(), dt, settings);
    if (!next) return std::nullopt;
    return PrimitiveState::from_array(*next);
}

struct RkglConfig {
    double tolerance = 1e-10;  // step-doubling acceptance tolerance
    double dt0 = 0.0;          // <= 0 means 1e-6 * (t_end - t0)
    double dt_min_factor = 1e-15;
    long max_steps = 50000000;
    NewtonSettings newton{};
};

struct RkglResult {
    std::vector<TrajectoryPoint> trajectory;
    long accepted = 0;
    long rejected = 0;
};

/// Adaptive reference integration with step-doubling error control: a full
/// step is compared against two half steps; the halved result is kept.
inline RkglResult rkgl3_integrate(const PrimitiveState& v_0, double t0, double t_end,
                                  const OdeParams& params, const RkglConfig& cfg = {}) {
    if (!(t_end > t0)) throw ConfigError("rkgl3_integrate: t_end must exceed t0");
    const double horizon = t_end - t0;
    double dt = (cfg.dt0 > 0.0) ? cfg.dt0 : 1e-6 * horizon;
    dt = std::min(dt, horizon);
    const double dt_min = cfg.dt_min_factor * horizon;

    RkglResult result;
    result.trajectory.push_back({t0, v_0, 0.0, 0});
    PrimitiveState v = v_0;
    double t = t0;
    long total_attempts = 0;
    while (t < t_end) {
        if (++total_attempts > cfg.max_steps)
            throw SolverError("rkgl3_integrate: step budget exhausted");
        const double remaining = t_end - t;
        const double dt_try = std::min(dt, remaining);

        const auto full = rkgl3_step(v, dt_try, params, cfg.newton);
        const auto half1 = rkgl3_step(v, 0.5 * dt_try, params, cfg.newton);
        std::optional<PrimitiveState> half2;
        if (half1) half2 = rkgl3_step(*half1, 0.5 * dt_try, params, cfg.newton);

        bool accept = false;
        double err = 0.0;
        if (full && half2) {
            err = relative_change(full->to_array(), half2->to_array(), 1e-300);
            accept = err <= cfg.tolerance;
        }
        if (accept) {
            t = (dt_try == remaining) ? t_end : t + dt_try;
            v = *half2;
            ++result.accepted;
            result.trajectory.push_back({t, v, dt_try, 0});
            const double grow =
                std::min(2.0, 0.9 * std::pow(cfg.tolerance / (err + 1e-300), 1.0 / 7.0));
            dt = dt_try * std::max(grow, 0.1);
        } else {
            ++result.rejected;
            dt = 0.5 * dt_try;
            if (dt < dt_min) throw StepSizeUnderflow(t, v, dt);
        }
    }
    return result;
}

struct OrderFit {
    double slope = 0.0;
    bool degenerate = false;
};

/// Least-squares slope of log(error) against log(dt).  The fit is flagged
/// degenerate when errors sit at round-off (or vanish), where no order can
/// be read off.
inline OrderFit fit_order(const std::vector<double>& dts, const std::vector<double>& errors,
                          double noise_floor = 1e-14) {
    OrderFit fit;
    if (dts.size() != errors.size() || dts.size() < 2) {
        fit.degenerate = true;
        return fit;
    }
    for (double e : errors)
        if (!(e > noise_floor)) {
            fit.degenerate = true;
            return fit;
        }
    const std::size_t n = dts.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(dts[i]);
        const double y = std::log(errors[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = static_cast<double>(n) * sxx - sx * sx;
    if (denom == 0.0) {
        fit.degenerate = true;
        return fit;
    }
    fit.slope = (static_cast<double>(n) * sxy - sx * sy) / denom;
    return fit;
}

}  // namespace bnrelax
