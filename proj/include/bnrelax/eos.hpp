#pragma once

// Stiffened-gas thermodynamics and state conversions for the two-phase
// relaxation system.  Both the ODE layer and the finite-volume layer sit on
// top of these types; everything here is a pure function of its inputs.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bnrelax {

class InadmissibleState : public std::runtime_error {
public:
    explicit InadmissibleState(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

class SolverError : public std::runtime_error {
public:
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Stiffened gas: p = (gamma - 1) rho e - gamma pi_inf.  The derived
// coefficients give the volumetric internal energy as rho e = k_a p + k_b;
// they appear in every pressure-equation evaluation and are stored up front.
struct EosPhase {
    double gamma;
    double pi_inf;
    double k_a;  // 1 / (gamma - 1)
    double k_b;  // gamma pi_inf / (gamma - 1)

    EosPhase() : EosPhase(1.4, 0.0) {}

    EosPhase(double gamma_, double pi_inf_)
        : gamma(gamma_),
          pi_inf(pi_inf_),
          k_a(1.0 / (gamma_ - 1.0)),
          k_b(gamma_ * pi_inf_ / (gamma_ - 1.0)) {
        if (!(gamma_ > 1.0)) throw ConfigError("EosPhase: gamma must be > 1");
        if (!(pi_inf_ >= 0.0)) throw ConfigError("EosPhase: pi_inf must be >= 0");
    }
};

/// Volumetric internal energy rho*e = k_a p + k_b [Pa].  Non-positive results
/// mean the state is thermodynamically inadmissible; callers decide.
inline double phase_internal_energy(double p, const EosPhase& eos) {
    return eos.k_a * p + eos.k_b;
}

/// a = sqrt(gamma (p + pi_inf) / rho) [m/s].
inline double sound_speed(double rho, double p, const EosPhase& eos) {
    const double radicand = eos.gamma * (p + eos.pi_inf) / rho;
    if (!(radicand > 0.0))
        throw InadmissibleState("sound_speed: non-positive gamma*(p+pi_inf)/rho");
    return std::sqrt(radicand);
}

// ODE unknowns V = (u1, u2, p1, p2, alpha1).
struct PrimitiveState {
    double u1;
    double u2;
    double p1;
    double p2;
    double alpha1;

    std::array<double, 5> to_array() const { return {u1, u2, p1, p2, alpha1}; }
    static PrimitiveState from_array(const std::array<double, 5>& a) {
        return {a[0], a[1], a[2], a[3], a[4]};
    }
};

enum class InterfaceClosure { Simple, Impedance };

// Frozen per-step parameters of the relaxation ODE.  The partial densities
// alpha_i rho_i have no source, so they enter as constants, not unknowns.
struct OdeParams {
    double m1;  // alpha1 rho1 [kg/m^3]
    double m2;  // alpha2 rho2 [kg/m^3]
    EosPhase eos1;
    EosPhase eos2;
    double lambda_fric;  // velocity relaxation rate [kg m^-3 s^-1]
    double nu_press;     // pressure relaxation rate [Pa^-1 s^-1]
    InterfaceClosure interface_closure = InterfaceClosure::Simple;
    // Interface velocity weighting uI = w*u1 + (1-w)*u2.  The model closure
    // is uI = u1 (w = 1); kept configurable because the impedance-weighted
    // interface pressure does not pin a matching uI.
    double u_interface_weight = 1.0;
};

// Seven conserved components of the one-dimensional system.
using Conserved1D = std::array<double, 7>;

namespace cons {
constexpr int M1 = 0;      // alpha1 rho1
constexpr int M2 = 1;      // alpha2 rho2
constexpr int MOM1 = 2;    // alpha1 rho1 u1
constexpr int MOM2 = 3;    // alpha2 rho2 u2
constexpr int EN1 = 4;     // alpha1 rho1 E1
constexpr int EN2 = 5;     // alpha2 rho2 E2
constexpr int ALPHA = 6;   // alpha1
}  // namespace cons

// Full primitive description of a finite-volume cell.
struct CellPrimState {
    double alpha1;
    double rho1;
    double rho2;
    double u1;
    double u2;
    double p1;
    double p2;
};

inline Conserved1D prim_to_cons(const CellPrimState& w, const EosPhase& eos1,
                                const EosPhase& eos2) {
    const double alpha2 = 1.0 - w.alpha1;
    const double m1 = w.alpha1 * w.rho1;
    const double m2 = alpha2 * w.rho2;
    Conserved1D q;
    q[cons::M1] = m1;
    q[cons::M2] = m2;
    q[cons::MOM1] = m1 * w.u1;
    q[cons::MOM2] = m2 * w.u2;
    q[cons::EN1] = w.alpha1 * phase_internal_energy(w.p1, eos1) + 0.5 * m1 * w.u1 * w.u1;
    q[cons::EN2] = alpha2 * phase_internal_energy(w.p2, eos2) + 0.5 * m2 * w.u2 * w.u2;
    q[cons::ALPHA] = w.alpha1;
    return q;
}

// Exact algebraic inversion of prim_to_cons.  Throws InadmissibleState naming
// the offending component; the FV layer re-throws with the cell index.
inline CellPrimState cons_to_prim(const Conserved1D& q, const EosPhase& eos1,
                                  const EosPhase& eos2) {
    for (double c : q)
        if (!std::isfinite(c)) throw InadmissibleState("cons_to_prim: non-finite component");
    const double alpha1 = q[cons::ALPHA];
    if (!(alpha1 > 0.0 && alpha1 < 1.0))
        throw InadmissibleState("cons_to_prim: alpha1 out of (0,1): " + std::to_string(alpha1));
    const double alpha2 = 1.0 - alpha1;
    const double m1 = q[cons::M1];
    const double m2 = q[cons::M2];
    if (!(m1 > 0.0)) throw InadmissibleState("cons_to_prim: non-positive alpha1*rho1");
    if (!(m2 > 0.0)) throw InadmissibleState("cons_to_prim: non-positive alpha2*rho2");

    CellPrimState w;
    w.alpha1 = alpha1;
    w.rho1 = m1 / alpha1;
    w.rho2 = m2 / alpha2;
    w.u1 = q[cons::MOM1] / m1;
    w.u2 = q[cons::MOM2] / m2;
    const double rhoe1 = (q[cons::EN1] - 0.5 * m1 * w.u1 * w.u1) / alpha1;
    const double rhoe2 = (q[cons::EN2] - 0.5 * m2 * w.u2 * w.u2) / alpha2;
    if (!(rhoe1 > 0.0))
        throw InadmissibleState("cons_to_prim: non-positive phase-1 internal energy");
    if (!(rhoe2 > 0.0))
        throw InadmissibleState("cons_to_prim: non-positive phase-2 internal energy");
    w.p1 = (eos1.gamma - 1.0) * rhoe1 - eos1.gamma * eos1.pi_inf;
    w.p2 = (eos2.gamma - 1.0) * rhoe2 - eos2.gamma * eos2.pi_inf;
    return w;
}

struct InterfaceState {
    double p_i;
    double u_i;
};

// Interface closure.  Simple: pI = p2, uI = u1.  Impedance: acoustic
// impedance weighting pI = (Z2 p1 + Z1 p2)/(Z1 + Z2) with Z_i = rho_i a_i;
// uI keeps the configured velocity weighting (default u1).  A phase in
// tension (p + pi_inf <= 0) has no real sound speed; the impedance weighting
// degrades to the Simple value there.
inline InterfaceState interface_state(const PrimitiveState& v, const OdeParams& params,
                                      double rho1, double rho2) {
    const double w = params.u_interface_weight;
    const double u_i = w * v.u1 + (1.0 - w) * v.u2;
    if (params.interface_closure == InterfaceClosure::Impedance &&
        v.p1 + params.eos1.pi_inf > 0.0 && v.p2 + params.eos2.pi_inf > 0.0 &&
        rho1 > 0.0 && rho2 > 0.0) {
        const double z1 = rho1 * sound_speed(rho1, v.p1, params.eos1);
        const double z2 = rho2 * sound_speed(rho2, v.p2, params.eos2);
        return {(z2 * v.p1 + z1 * v.p2) / (z1 + z2), u_i};
    }
    return {v.p2, u_i};
}

}  // namespace bnrelax
