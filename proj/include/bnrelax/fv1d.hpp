#pragma once

// One-dimensional path-conservative MUSCL-Hancock finite-volume solver for
// the seven-equation two-phase system, with operator splitting calling the
// relaxation integrator cell by cell.

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>
#include <vector>

#include "bnrelax/eos.hpp"
#include "bnrelax/parallel.hpp"
#include "bnrelax/relax.hpp"

namespace bnrelax {

struct Grid1D {
    double x_min;
    double x_max;
    long n_cells;
    double dx;

    Grid1D(double x_min_, double x_max_, long n_cells_)
        : x_min(x_min_), x_max(x_max_), n_cells(n_cells_),
          dx((x_max_ - x_min_) / static_cast<double>(n_cells_)) {
        if (n_cells_ < 4) throw ConfigError("Grid1D: need at least 4 cells");
        if (!(x_max_ > x_min_)) throw ConfigError("Grid1D: empty domain");
    }

    double center(long i) const { return x_min + (static_cast<double>(i) + 0.5) * dx; }
};

// Conserved states over the cells plus two ghost layers per side.
struct CellField {
    Grid1D grid;
    std::vector<Conserved1D> q;  // size n_cells + 4, interior [2, n_cells + 2)

    explicit CellField(const Grid1D& g)
        : grid(g), q(static_cast<std::size_t>(g.n_cells) + 4) {}

    Conserved1D& cell(long i) { return q[static_cast<std::size_t>(i + 2)]; }
    const Conserved1D& cell(long i) const { return q[static_cast<std::size_t>(i + 2)]; }
};

enum class RiemannSolver { Rusanov, Hll, Hllem };
enum class SlopeLimiter { MinMod, Zero };
enum class Boundary { Transmissive, Periodic };

struct HyperbolicConfig {
    double cfl = 0.95;
    RiemannSolver riemann = RiemannSolver::Hllem;
    SlopeLimiter limiter = SlopeLimiter::MinMod;
    Boundary boundary = Boundary::Transmissive;
    bool strang_splitting = false;  // default: hyperbolic step then relaxation
    double alpha_min = 1e-12;       // clamp margin applied after transport
};

// Relaxation model shared by all cells; partial densities vary per cell.
struct RelaxationModel {
    EosPhase eos1;
    EosPhase eos2;
    double lambda_fric;
    double nu_press;
    InterfaceClosure closure = InterfaceClosure::Impedance;
    double u_interface_weight = 1.0;

    OdeParams cell_params(double m1, double m2) const {
        return {m1, m2, eos1, eos2, lambda_fric, nu_press, closure, u_interface_weight};
    }
};

namespace detail {
inline Conserved1D flux_from_prim(const Conserved1D& q, const CellPrimState& w) {
    const double alpha2 = 1.0 - w.alpha1;
    Conserved1D f;
    f[cons::M1] = q[cons::M1] * w.u1;
    f[cons::M2] = q[cons::M2] * w.u2;
    f[cons::MOM1] = q[cons::MOM1] * w.u1 + w.alpha1 * w.p1;
    f[cons::MOM2] = q[cons::MOM2] * w.u2 + alpha2 * w.p2;
    f[cons::EN1] = (q[cons::EN1] + w.alpha1 * w.p1) * w.u1;
    f[cons::EN2] = (q[cons::EN2] + alpha2 * w.p2) * w.u2;
    f[cons::ALPHA] = 0.0;
    return f;
}
}  // namespace detail

/// Conservative flux of the seven-equation system; the alpha1 row has none.
inline Conserved1D physical_flux(const Conserved1D& q, const EosPhase& eos1,
                                 const EosPhase& eos2) {
    return detail::flux_from_prim(q, cons_to_prim(q, eos1, eos2));
}

namespace detail {
// Signal-speed estimate that stays finite for phases in tension (where the
// stiffened gas has no real sound speed the phase contributes |u| alone).
inline double guarded_sound_speed(double rho, double p, const EosPhase& eos) {
    const double radicand = eos.gamma * (p + eos.pi_inf) / rho;
    return radicand > 0.0 ? std::sqrt(radicand) : 0.0;
}
}  // namespace detail

/// Fastest signal speed max_i(|u_i| + a_i); the CFL bound.
inline double max_wavespeed(const Conserved1D& q, const EosPhase& eos1,
                            const EosPhase& eos2) {
    const CellPrimState w = cons_to_prim(q, eos1, eos2);
    const double a1 = detail::guarded_sound_speed(w.rho1, w.p1, eos1);
    const double a2 = detail::guarded_sound_speed(w.rho2, w.p2, eos2);
    return std::max(std::abs(w.u1) + a1, std::abs(w.u2) + a2);
}

namespace detail {

struct PathAverages {
    double p_i;     // path-averaged interface pressure
    double u_i;     // path-averaged interface velocity
    double pi_ui;   // path average of the product pI uI
};

// Three-point Gauss quadrature of the interface closure along the straight
// segment between two conserved states.  Falls back to the endpoint average
// when an interior path state fails to decode (the endpoints are admissible
// by precondition).
inline PathAverages path_interface_averages(const Conserved1D& ql, const Conserved1D& qr,
                                            const RelaxationModel& model) {
    static constexpr double nodes[3] = {0.5 - 0.3872983346207417, 0.5,
                                        0.5 + 0.3872983346207417};
    static constexpr double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

    const auto closure_at = [&model](const Conserved1D& q) {
        const CellPrimState w = cons_to_prim(q, model.eos1, model.eos2);
        const PrimitiveState v{w.u1, w.u2, w.p1, w.p2, w.alpha1};
        const OdeParams params = model.cell_params(q[cons::M1], q[cons::M2]);
        return interface_state(v, params, w.rho1, w.rho2);
    };

    try {
        // Node states and the sum are arranged so a mirrored interface
        // produces bit-exactly mirrored averages: (1-s) ql + s qr maps onto
        // the opposite node under reflection, and the outer nodes are summed
        // as a commutative pair.
        InterfaceState at[3];
        for (int g = 0; g < 3; ++g) {
            Conserved1D qs;
            for (std::size_t c = 0; c < qs.size(); ++c)
                qs[c] = (1.0 - nodes[g]) * ql[c] + nodes[g] * qr[c];
            at[g] = closure_at(qs);
        }
        PathAverages acc;
        acc.p_i = weights[0] * (at[0].p_i + at[2].p_i) + weights[1] * at[1].p_i;
        acc.u_i = weights[0] * (at[0].u_i + at[2].u_i) + weights[1] * at[1].u_i;
        acc.pi_ui = weights[0] * (at[0].p_i * at[0].u_i + at[2].p_i * at[2].u_i) +
                    weights[1] * at[1].p_i * at[1].u_i;
        return acc;
    } catch (const InadmissibleState&) {
        const InterfaceState il = closure_at(ql);
        const InterfaceState ir = closure_at(qr);
        return {0.5 * (il.p_i + ir.p_i), 0.5 * (il.u_i + ir.u_i),
                0.5 * (il.p_i * il.u_i + ir.p_i * ir.u_i)};
    }
}

inline Conserved1D noncons_from_averages(const PathAverages& avg, double d_alpha) {
    Conserved1D b;
    b[cons::M1] = 0.0;
    b[cons::M2] = 0.0;
    b[cons::MOM1] = -avg.p_i * d_alpha;
    b[cons::MOM2] = avg.p_i * d_alpha;
    b[cons::EN1] = -avg.pi_ui * d_alpha;
    b[cons::EN2] = avg.pi_ui * d_alpha;
    b[cons::ALPHA] = avg.u_i * d_alpha;
    return b;
}

}  // namespace detail

/// Path integral of B(Q) dQ along the straight segment between the two
/// states: the fluctuation contribution of the jump.
inline Conserved1D noncons_product(const Conserved1D& ql, const Conserved1D& qr,
                                   const RelaxationModel& model) {
    const double d_alpha = qr[cons::ALPHA] - ql[cons::ALPHA];
    if (d_alpha == 0.0) return Conserved1D{};
    return detail::noncons_from_averages(detail::path_interface_averages(ql, qr, model),
                                         d_alpha);
}

struct InterfaceUpdate {
    Conserved1D flux;        // conservative interface flux
    Conserved1D fluct_half;  // half of the jump fluctuation, added to both sides
};

/// Approximate Riemann solver at one interface: HLL family flux with Davis
/// wavespeed bounds plus the symmetric split of the nonconservative
/// fluctuation.  HLLEM removes the HLL dissipation acting on the alpha1
/// contact, scaled by the standard bounded anti-diffusion coefficient.
inline InterfaceUpdate riemann_flux_prim(const Conserved1D& ql, const CellPrimState& wl,
                                         const Conserved1D& qr, const CellPrimState& wr,
                                         const HyperbolicConfig& cfg,
                                         const RelaxationModel& model) {
    const double a1l = detail::guarded_sound_speed(wl.rho1, wl.p1, model.eos1);
    const double a2l = detail::guarded_sound_speed(wl.rho2, wl.p2, model.eos2);
    const double a1r = detail::guarded_sound_speed(wr.rho1, wr.p1, model.eos1);
    const double a2r = detail::guarded_sound_speed(wr.rho2, wr.p2, model.eos2);

    const double s_l = std::min(std::min(wl.u1 - a1l, wl.u2 - a2l),
                                std::min(wr.u1 - a1r, wr.u2 - a2r));
    const double s_r = std::max(std::max(wl.u1 + a1l, wl.u2 + a2l),
                                std::max(wr.u1 + a1r, wr.u2 + a2r));

    const Conserved1D fl = detail::flux_from_prim(ql, wl);
    const Conserved1D fr = detail::flux_from_prim(qr, wr);

    InterfaceUpdate out;
    const double d_alpha = qr[cons::ALPHA] - ql[cons::ALPHA];
    detail::PathAverages avg{0.0, 0.0, 0.0};
    if (d_alpha != 0.0) avg = detail::path_interface_averages(ql, qr, model);
    out.fluct_half = (d_alpha == 0.0) ? Conserved1D{}
                                      : detail::noncons_from_averages(avg, d_alpha);
    for (double& c : out.fluct_half) c *= 0.5;

    if (cfg.riemann == RiemannSolver::Rusanov) {
        const double s_max = std::max(std::abs(s_l), std::abs(s_r));
        for (std::size_t c = 0; c < out.flux.size(); ++c)
            out.flux[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * s_max * (qr[c] - ql[c]);
        return out;
    }

    if (s_l >= 0.0) {
        out.flux = fl;
        return out;
    }
    if (s_r <= 0.0) {
        out.flux = fr;
        return out;
    }
    const double inv = 1.0 / (s_r - s_l);
    for (std::size_t c = 0; c < out.flux.size(); ++c)
        out.flux[c] = (s_r * fl[c] - s_l * fr[c] + s_l * s_r * (qr[c] - ql[c])) * inv;

    if (cfg.riemann == RiemannSolver::Hllem && d_alpha != 0.0) {
        // Anti-diffusive correction for the alpha1 contact (intermediate
        // eigenvalue uI): remove the HLL dissipation acting on the jump the
        // contact wave carries.  The contact moves volume fraction together
        // with the partial masses, momenta and energies it implies at the
        // interface-averaged phase states; without this the dissipation of
        // the alpha jump dumps mass and energy into a vanishing phase.
        double phi = 1.0 - (std::min(0.0, avg.u_i) / s_l + std::max(0.0, avg.u_i) / s_r);
        phi = std::clamp(phi, 0.0, 1.0);
        const double rho1b = 0.5 * (wl.rho1 + wr.rho1);
        const double rho2b = 0.5 * (wl.rho2 + wr.rho2);
        const double u1b = 0.5 * (wl.u1 + wr.u1);
        const double u2b = 0.5 * (wl.u2 + wr.u2);
        const double rhoe1b =
            phase_internal_energy(0.5 * (wl.p1 + wr.p1), model.eos1);
        const double rhoe2b =
            phase_internal_energy(0.5 * (wl.p2 + wr.p2), model.eos2);
        Conserved1D contact;
        contact[cons::M1] = rho1b;
        contact[cons::M2] = -rho2b;
        contact[cons::MOM1] = rho1b * u1b;
        contact[cons::MOM2] = -rho2b * u2b;
        contact[cons::EN1] = rhoe1b + 0.5 * rho1b * u1b * u1b;
        contact[cons::EN2] = -(rhoe2b + 0.5 * rho2b * u2b * u2b);
        contact[cons::ALPHA] = 1.0;
        // Clip the contact share row-wise so the anti-diffusion never
        // exceeds (or flips) the jump actually being dissipated.
        const double mu = s_l * s_r * inv;
        for (std::size_t c = 0; c < out.flux.size(); ++c) {
            const double dq = qr[c] - ql[c];
            const double share = std::clamp(contact[c] * d_alpha, std::min(0.0, dq),
                                            std::max(0.0, dq));
            out.flux[c] -= mu * phi * share;
        }
    }
    return out;
}

inline InterfaceUpdate riemann_flux(const Conserved1D& ql, const Conserved1D& qr,
                                    const HyperbolicConfig& cfg,
                                    const RelaxationModel& model) {
    return riemann_flux_prim(ql, cons_to_prim(ql, model.eos1, model.eos2), qr,
                             cons_to_prim(qr, model.eos1, model.eos2), cfg, model);
}

namespace detail {

// Primitive set used for reconstruction.
using PrimVec = std::array<double, 7>;

inline PrimVec to_vec(const CellPrimState& w) {
    return {w.alpha1, w.rho1, w.rho2, w.u1, w.u2, w.p1, w.p2};
}

inline CellPrimState from_vec(const PrimVec& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

inline double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return (std::abs(a) < std::abs(b)) ? a : b;
}

inline bool reconstruction_ok(const CellPrimState& w, const RelaxationModel& model,
                              double alpha_min) {
    return w.alpha1 > alpha_min && w.alpha1 < 1.0 - alpha_min && w.rho1 > 0.0 &&
           w.rho2 > 0.0 && w.p1 + model.eos1.gamma * model.eos1.pi_inf > 0.0 &&
           w.p2 + model.eos2.gamma * model.eos2.pi_inf > 0.0;
}

inline void fill_ghosts(CellField& field, Boundary boundary) {
    const long n = field.grid.n_cells;
    if (boundary == Boundary::Periodic) {
        field.cell(-1) = field.cell(n - 1);
        field.cell(-2) = field.cell(n - 2);
        field.cell(n) = field.cell(0);
        field.cell(n + 1) = field.cell(1);
    } else {
        field.cell(-1) = field.cell(0);
        field.cell(-2) = field.cell(0);
        field.cell(n) = field.cell(n - 1);
        field.cell(n + 1) = field.cell(n - 1);
    }
}

}  // namespace detail

/// One second-order hyperbolic step: minmod-limited primitive reconstruction,
/// cell-local half-step predictor carrying both the flux gradient and the
/// B dQ term, HLL-family interface update with the symmetric fluctuation
/// split, and the in-cell fluctuation of the reconstructed jump.
inline CellField muscl_hancock_step(const CellField& field, double dt,
                                    const HyperbolicConfig& cfg,
                                    const RelaxationModel& model,
                                    bool validate_energies = true) {
    const long n = field.grid.n_cells;
    const double lam = dt / field.grid.dx;

    CellField work = field;
    detail::fill_ghosts(work, cfg.boundary);

    // decoded primitives over interior + ghosts
    const long total = n + 4;
    std::vector<CellPrimState> w(static_cast<std::size_t>(total));
    for (long j = 0; j < total; ++j) {
        try {
            w[static_cast<std::size_t>(j)] =
                cons_to_prim(work.q[static_cast<std::size_t>(j)], model.eos1, model.eos2);
        } catch (const InadmissibleState& err) {
            throw InadmissibleState("cell " + std::to_string(j - 2) + ": " + err.what());
        }
    }

    // boundary-extrapolated, half-step-evolved states per cell (indices 1..n+2)
    std::vector<Conserved1D> q_minus(static_cast<std::size_t>(total));
    std::vector<Conserved1D> q_plus(static_cast<std::size_t>(total));
    std::vector<CellPrimState> w_minus(static_cast<std::size_t>(total));
    std::vector<CellPrimState> w_plus(static_cast<std::size_t>(total));
    std::vector<Conserved1D> cell_fluct(static_cast<std::size_t>(total), Conserved1D{});

    for (long j = 1; j < total - 1; ++j) {
        const std::size_t js = static_cast<std::size_t>(j);
        const detail::PrimVec wc = detail::to_vec(w[js]);
        detail::PrimVec slope{};
        if (cfg.limiter == SlopeLimiter::MinMod) {
            const detail::PrimVec wl = detail::to_vec(w[js - 1]);
            const detail::PrimVec wr = detail::to_vec(w[js + 1]);
            for (std::size_t c = 0; c < 7; ++c)
                slope[c] = detail::minmod(wc[c] - wl[c], wr[c] - wc[c]);
        }

        detail::PrimVec lo = wc, hi = wc;
        for (std::size_t c = 0; c < 7; ++c) {
            lo[c] -= 0.5 * slope[c];
            hi[c] += 0.5 * slope[c];
        }
        CellPrimState w_lo = detail::from_vec(lo);
        CellPrimState w_hi = detail::from_vec(hi);
        if (!detail::reconstruction_ok(w_lo, model, cfg.alpha_min) ||
            !detail::reconstruction_ok(w_hi, model, cfg.alpha_min)) {
            w_lo = w[js];
            w_hi = w[js];
        }

        const Conserved1D qlo = prim_to_cons(w_lo, model.eos1, model.eos2);
        const Conserved1D qhi = prim_to_cons(w_hi, model.eos1, model.eos2);

        // cell-centred closure for the in-cell nonconservative term
        const PrimitiveState vc{w[js].u1, w[js].u2, w[js].p1, w[js].p2, w[js].alpha1};
        const OdeParams pc = model.cell_params(work.q[js][cons::M1], work.q[js][cons::M2]);
        const InterfaceState is = interface_state(vc, pc, w[js].rho1, w[js].rho2);
        const double d_alpha_cell = w_hi.alpha1 - w_lo.alpha1;
        const Conserved1D b_cell = detail::noncons_from_averages(
            {is.p_i, is.u_i, is.p_i * is.u_i}, d_alpha_cell);

        Conserved1D pred_lo = qlo;
        Conserved1D pred_hi = qhi;
        CellPrimState pw_lo = w_lo;
        CellPrimState pw_hi = w_hi;
        if (d_alpha_cell != 0.0 || cfg.limiter == SlopeLimiter::MinMod) {
            try {
                const Conserved1D f_lo = detail::flux_from_prim(qlo, w_lo);
                const Conserved1D f_hi = detail::flux_from_prim(qhi, w_hi);
                Conserved1D try_lo, try_hi;
                for (std::size_t c = 0; c < 7; ++c) {
                    const double incr = -0.5 * lam * (f_hi[c] - f_lo[c] + b_cell[c]);
                    try_lo[c] = qlo[c] + incr;
                    try_hi[c] = qhi[c] + incr;
                }
                // the predictor must stay decodable; otherwise drop it
                const CellPrimState dw_lo = cons_to_prim(try_lo, model.eos1, model.eos2);
                const CellPrimState dw_hi = cons_to_prim(try_hi, model.eos1, model.eos2);
                pred_lo = try_lo;
                pred_hi = try_hi;
                pw_lo = dw_lo;
                pw_hi = dw_hi;
            } catch (const InadmissibleState&) {
            }
        }
        q_minus[js] = pred_lo;
        q_plus[js] = pred_hi;
        w_minus[js] = pw_lo;
        w_plus[js] = pw_hi;
        cell_fluct[js] = detail::noncons_from_averages(
            {is.p_i, is.u_i, is.p_i * is.u_i},
            pred_hi[cons::ALPHA] - pred_lo[cons::ALPHA]);
    }

    // interface sweep: interfaces j+1/2 for j in [1, n+2)
    std::vector<InterfaceUpdate> iface(static_cast<std::size_t>(total - 3));
    for (long j = 1; j < total - 2; ++j) {
        try {
            iface[static_cast<std::size_t>(j - 1)] =
                riemann_flux_prim(q_plus[static_cast<std::size_t>(j)],
                                  w_plus[static_cast<std::size_t>(j)],
                                  q_minus[static_cast<std::size_t>(j + 1)],
                                  w_minus[static_cast<std::size_t>(j + 1)], cfg, model);
        } catch (const InadmissibleState& err) {
            throw InadmissibleState("interface " + std::to_string(j - 2) + "+1/2: " +
                                    err.what());
        }
    }

    CellField next = field;
    for (long i = 0; i < n; ++i) {
        const std::size_t js = static_cast<std::size_t>(i + 2);
        const InterfaceUpdate& left = iface[static_cast<std::size_t>(i)];
        const InterfaceUpdate& right = iface[static_cast<std::size_t>(i + 1)];
        Conserved1D qn = work.q[js];
        for (std::size_t c = 0; c < 7; ++c) {
            // grouped so reflected cells perform sign-mirrored arithmetic
            const double conv = right.flux[c] - left.flux[c];
            const double fluct = right.fluct_half[c] + left.fluct_half[c];
            qn[c] -= lam * ((conv + fluct) + cell_fluct[js][c]);
        }
        qn[cons::ALPHA] = std::clamp(qn[cons::ALPHA], cfg.alpha_min, 1.0 - cfg.alpha_min);
        // Degenerate-sliver guard, same role as the alpha clamp: a partial
        // mass driven through zero by flux imbalances far below the cell's
        // resolvable content is floored at the clamp margin.
        qn[cons::M1] = std::max(qn[cons::M1], cfg.alpha_min * w[js].rho1);
        qn[cons::M2] = std::max(qn[cons::M2], cfg.alpha_min * w[js].rho2);
        for (double c : qn)
            if (!std::isfinite(c))
                throw InadmissibleState("cell " + std::to_string(i) +
                                        " after transport: non-finite component");
        if (validate_energies) {
            try {
                (void)cons_to_prim(qn, model.eos1, model.eos2);
            } catch (const InadmissibleState& err) {
                throw InadmissibleState("cell " + std::to_string(i) + " after transport: " +
                                        err.what());
            }
        }
        next.cell(i) = qn;
    }
    return next;
}

/// Largest stable timestep for the field under the configured CFL number.
inline double cfl_timestep(const CellField& field, const HyperbolicConfig& cfg,
                           const RelaxationModel& model) {
    double fastest = 0.0;
    for (long i = 0; i < field.grid.n_cells; ++i)
        fastest = std::max(fastest, max_wavespeed(field.cell(i), model.eos1, model.eos2));
    if (fastest <= 0.0) throw SolverError("cfl_timestep: no signal speed");
    return cfg.cfl * field.grid.dx / fastest;
}

namespace detail {

inline void relax_cells(CellField& field, double dt, const RelaxationModel& model,
                        const SolverConfig& relax_cfg) {
    const long n = field.grid.n_cells;
    std::vector<std::string> failure(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t idx) {
        Conserved1D& q = field.cell(static_cast<long>(idx));
        try {
            CellPrimState w;
            try {
                w = cons_to_prim(q, model.eos1, model.eos2);
            } catch (const InadmissibleState&) {
                // Transport across a near-pure interface can hand a vanishing
                // phase more momentum than its energy budget covers (spurious
                // phase velocities of 1e8 m/s on a 1e-8 sliver); such a state
                // lies outside the relaxation system's admissible set.  With
                // both relaxations stiff the model sends it to the mutual
                // equilibrium, so project the cell there conservatively: mass,
                // momentum and total energy are kept bit-exact.
                if (!(model.lambda_fric > 0.0) || !(model.nu_press > 0.0)) throw;
                const double m1 = q[cons::M1];
                const double m2 = q[cons::M2];
                const double alpha1 = q[cons::ALPHA];
                const double alpha2 = 1.0 - alpha1;
                const double u_mix = (q[cons::MOM1] + q[cons::MOM2]) / (m1 + m2);
                const double internal = q[cons::EN1] + q[cons::EN2] -
                                        0.5 * (m1 + m2) * u_mix * u_mix;
                if (!(internal > 0.0)) throw;
                const double denom = alpha1 * model.eos1.k_a + alpha2 * model.eos2.k_a;
                const double p_eq =
                    (internal - alpha1 * model.eos1.k_b - alpha2 * model.eos2.k_b) / denom;
                CellPrimState projected{alpha1, m1 / alpha1, m2 / alpha2,
                                        u_mix,  u_mix,       p_eq, p_eq};
                if (!(p_eq + model.eos1.gamma * model.eos1.pi_inf > 0.0) ||
                    !(p_eq + model.eos2.gamma * model.eos2.pi_inf > 0.0)) {
                    // No admissible common pressure (one phase would sit in
                    // tension past its energy floor): hand the broken
                    // minority sliver a sliver of the internal energy and
                    // let the healthy majority carry the rest.
                    const bool phase1_major = alpha1 >= 0.5;
                    const double rhoe_min = 1e-9 * internal / (phase1_major ? alpha2 : alpha1);
                    const double rhoe_maj =
                        (internal - 1e-9 * internal) / (phase1_major ? alpha1 : alpha2);
                    const EosPhase& eos_maj = phase1_major ? model.eos1 : model.eos2;
                    const EosPhase& eos_min = phase1_major ? model.eos2 : model.eos1;
                    const double p_maj = (rhoe_maj - eos_maj.k_b) / eos_maj.k_a;
                    const double p_min = (rhoe_min - eos_min.k_b) / eos_min.k_a;
                    projected.p1 = phase1_major ? p_maj : p_min;
                    projected.p2 = phase1_major ? p_min : p_maj;
                }
                const Conserved1D relaxed =
                    prim_to_cons(projected, model.eos1, model.eos2);
                w = cons_to_prim(relaxed, model.eos1, model.eos2);
                q = relaxed;
            }
            // equilibrium fast path: nothing to relax
            const double u_scale = std::abs(w.u1) + std::abs(w.u2) + 1.0;
            const double p_scale = std::abs(w.p1) + std::abs(w.p2);
            const double rel_du = std::abs(w.u1 - w.u2) / u_scale;
            const double rel_dp = std::abs(w.p1 - w.p2) / p_scale;
            if (rel_du <= 1e-14 && rel_dp <= 1e-14) return;

            const OdeParams params = model.cell_params(q[cons::M1], q[cons::M2]);
            SolverConfig cfg = relax_cfg;
            if (cfg.dt0 <= 0.0) {
                // mildly perturbed cells go in one full-interval attempt
                // (the quarter-step ladder reaches the same iterated
                // equilibrium in more attempts); strong transients keep it
                cfg.dt0 = (rel_du <= 1e-2 && rel_dp <= 1e-2) ? dt : 0.25 * dt;
            }
            // Stiff-limit cascades next to near-pure cells need sub-steps of
            // order 1/K ~ alpha/(nu p); with nu = 1e20 that sits far below
            // any fixed fraction of the hyperbolic step.
            if (cfg.dt_min <= 0.0) cfg.dt_min = 1e-40 * dt;
            const IntegrationResult res =
                integrate({w.u1, w.u2, w.p1, w.p2, w.alpha1}, 0.0, dt, params, cfg, false);
            const PrimitiveState& end = res.trajectory.back().state;

            CellPrimState out;
            out.alpha1 = end.alpha1;
            out.rho1 = q[cons::M1] / end.alpha1;
            out.rho2 = q[cons::M2] / (1.0 - end.alpha1);
            out.u1 = end.u1;
            out.u2 = end.u2;
            out.p1 = end.p1;
            out.p2 = end.p2;

            // The relaxation equations conserve the mixture energy exactly;
            // the integrated pressures carry the scheme's truncation error.
            // Restore the cell energy exactly: first try shifting both
            // pressures by the same amount (energy is affine in them and the
            // relaxed pressure gap is untouched); if that lands a phase
            // outside its energy floor, rescale the phase internal energies
            // instead, which keeps them positive for any target.
            const double e_target = q[cons::EN1] + q[cons::EN2];
            Conserved1D qq = prim_to_cons(out, model.eos1, model.eos2);
            const double alpha2_out = 1.0 - out.alpha1;
            const double denom =
                out.alpha1 * model.eos1.k_a + alpha2_out * model.eos2.k_a;
            const double shift = (e_target - qq[cons::EN1] - qq[cons::EN2]) / denom;
            CellPrimState repaired = out;
            repaired.p1 += shift;
            repaired.p2 += shift;
            if (repaired.p1 + model.eos1.gamma * model.eos1.pi_inf > 0.0 &&
                repaired.p2 + model.eos2.gamma * model.eos2.pi_inf > 0.0) {
                qq = prim_to_cons(repaired, model.eos1, model.eos2);
            } else {
                const double kinetic = 0.5 * q[cons::M1] * out.u1 * out.u1 +
                                       0.5 * q[cons::M2] * out.u2 * out.u2;
                const double e_int = out.alpha1 * phase_internal_energy(out.p1, model.eos1) +
                                     alpha2_out * phase_internal_energy(out.p2, model.eos2);
                const double e_int_target = e_target - kinetic;
                if (e_int > 0.0 && e_int_target > 0.0) {
                    const double scale = e_int_target / e_int;
                    repaired = out;
                    repaired.p1 =
                        (scale * phase_internal_energy(out.p1, model.eos1) - model.eos1.k_b) /
                        model.eos1.k_a;
                    repaired.p2 =
                        (scale * phase_internal_energy(out.p2, model.eos2) - model.eos2.k_b) /
                        model.eos2.k_a;
                    qq = prim_to_cons(repaired, model.eos1, model.eos2);
                }
            }
            q = qq;
        } catch (const std::exception& err) {
            failure[idx] = err.what();
        }
    });
    for (long i = 0; i < n; ++i)
        if (!failure[static_cast<std::size_t>(i)].empty())
            throw SolverError("relaxation in cell " + std::to_string(i) + ": " +
                              failure[static_cast<std::size_t>(i)]);
}

}  // namespace detail

/// Godunov-split advance over one timestep: hyperbolic transport, then the
/// stiff relaxation integrated per cell with frozen partial densities.
/// Strang mode wraps the transport in two half relaxations.
inline CellField split_advance(const CellField& field, double dt,
                               const HyperbolicConfig& cfg, const RelaxationModel& model,
                               const SolverConfig& relax_cfg) {
    const bool has_source = model.lambda_fric > 0.0 || model.nu_press > 0.0;
    if (!has_source) return muscl_hancock_step(field, dt, cfg, model);

    if (cfg.strang_splitting) {
        CellField stage = field;
        detail::relax_cells(stage, 0.5 * dt, model, relax_cfg);
        stage = muscl_hancock_step(stage, dt, cfg, model, false);
        detail::relax_cells(stage, 0.5 * dt, model, relax_cfg);
        return stage;
    }
    CellField stage = muscl_hancock_step(field, dt, cfg, model, false);
    detail::relax_cells(stage, dt, model, relax_cfg);
    return stage;
}

// Piecewise-constant Riemann initial data plus run controls.
struct RiemannProblem {
    CellPrimState left;
    CellPrimState right;
    double x_jump;
    double t_end;
    double x_min = 0.0;
    double x_max = 1.0;
    RelaxationModel model;
};

struct RpRunStats {
    long steps = 0;
    double wall_seconds = 0.0;
};

struct Snapshot {
    double time;
    CellField field;
};

inline CellField init_riemann_field(const RiemannProblem& rp, long n_cells) {
    CellField field(Grid1D(rp.x_min, rp.x_max, n_cells));
    for (long i = 0; i < n_cells; ++i) {
        const bool is_left = field.grid.center(i) < rp.x_jump;
        field.cell(i) =
            prim_to_cons(is_left ? rp.left : rp.right, rp.model.eos1, rp.model.eos2);
    }
    return field;
}

/// March a Riemann problem to its final time, storing snapshots at the
/// requested times (the final state is always captured).
inline std::vector<Snapshot> run_riemann_problem(const RiemannProblem& rp, long n_cells,
                                                 const HyperbolicConfig& cfg,
                                                 const SolverConfig& relax_cfg,
                                                 std::vector<double> snapshot_times,
                                                 RpRunStats* stats = nullptr) {
    std::sort(snapshot_times.begin(), snapshot_times.end());
    CellField field = init_riemann_field(rp, n_cells);

    std::vector<Snapshot> out;
    double t = 0.0;
    std::size_t next_snap = 0;
    long steps = 0;
    while (t < rp.t_end) {
        double dt = cfl_timestep(field, cfg, rp.model);
        double target = rp.t_end;
        while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= t)
            ++next_snap;
        if (next_snap < snapshot_times.size())
            target = std::min(target, snapshot_times[next_snap]);
        const bool lands = t + dt >= target;
        if (lands) dt = target - t;
        field = split_advance(field, dt, cfg, rp.model, relax_cfg);
        t = lands ? target : t + dt;
        ++steps;
        if (next_snap < snapshot_times.size() && t == snapshot_times[next_snap]) {
            out.push_back({t, field});
            ++next_snap;
        }
    }
    if (out.empty() || out.back().time != rp.t_end) out.push_back({rp.t_end, field});
    if (stats != nullptr) stats->steps = steps;
    return out;
}

}  // namespace bnrelax
