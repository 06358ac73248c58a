#pragma once

// Built-in test problems: two homogeneous relaxation tests (A1, A2) and
// three Riemann problems (RP1 liquid-vapour dodecane shock tube, RP2
// diverging rarefactions in water, RP3 finite-rate sweep).

#include <string>

#include "bnrelax/eos.hpp"
#include "bnrelax/fv1d.hpp"
#include "bnrelax/relax.hpp"

namespace bnrelax {

enum class ProblemKind { A1, A2, RP1, RP2, RP3, CustomOde, CustomRp };

inline ProblemKind problem_from_name(const std::string& name) {
    if (name == "A1" || name == "a1") return ProblemKind::A1;
    if (name == "A2" || name == "a2") return ProblemKind::A2;
    if (name == "RP1" || name == "rp1") return ProblemKind::RP1;
    if (name == "RP2" || name == "rp2") return ProblemKind::RP2;
    if (name == "RP3" || name == "rp3") return ProblemKind::RP3;
    if (name == "custom-ode") return ProblemKind::CustomOde;
    if (name == "custom-rp") return ProblemKind::CustomRp;
    throw ConfigError("unknown problem '" + name +
                      "' (expected A1, A2, RP1, RP2, RP3, custom-ode, custom-rp)");
}

inline const char* problem_name(ProblemKind kind) {
    switch (kind) {
        case ProblemKind::A1: return "A1";
        case ProblemKind::A2: return "A2";
        case ProblemKind::RP1: return "RP1";
        case ProblemKind::RP2: return "RP2";
        case ProblemKind::RP3: return "RP3";
        case ProblemKind::CustomOde: return "custom-ode";
        case ProblemKind::CustomRp: return "custom-rp";
    }
    return "?";
}

struct OdeProblem {
    PrimitiveState v0;
    OdeParams params;
    double t_end;
};

/// Homogeneous relaxation test A1: counter-streaming phases with a pressure
/// gap, run to 1 ms.
inline OdeProblem preset_a1() {
    return {{-5.0, 5.0, 0.1, 20.0, 0.9},
            {1.0, 4.0, EosPhase(6.0, 0.0), EosPhase(1.4, 0.0), 1e9, 10.0,
             InterfaceClosure::Simple, 1.0},
            1.0e-3};
}

/// Homogeneous relaxation test A2: 2e8 Pa against 1 Pa at rest, run to 1 ms.
inline OdeProblem preset_a2() {
    return {{0.0, 0.0, 2.0e8, 1.0, 0.4},
            {780.0, 0.22, EosPhase(6.0, 100.0), EosPhase(1.4, 0.0), 1e9, 10.0,
             InterfaceClosure::Simple, 1.0},
            1.0e-3};
}

/// RP1: liquid-vapour dodecane shock tube, 100 MPa against 100 kPa with
/// near-pure phases on both sides, stiff relaxation.
inline RiemannProblem preset_rp1() {
    RiemannProblem rp{
        {1.0 - 1e-8, 500.0, 2.0, 0.0, 0.0, 1e8, 1e8},
        {1e-8, 500.0, 2.0, 0.0, 0.0, 1e5, 1e5},
        0.75,
        473e-6,
        0.0,
        1.0,
        {EosPhase(2.35, 4e8), EosPhase(1.025, 0.0), 1e9, 1e20,
         InterfaceClosure::Impedance, 1.0}};
    return rp;
}

/// RP2: two diverging rarefaction waves in liquid water at 100 kPa.
inline RiemannProblem preset_rp2() {
    RiemannProblem rp{
        {0.99, 1150.0, 0.63, -2.0, -2.0, 1e5, 1e5},
        {0.99, 1150.0, 0.63, 2.0, 2.0, 1e5, 1e5},
        0.5,
        3.2e-3,
        0.0,
        1.0,
        {EosPhase(2.35, 1e9), EosPhase(1.43, 0.0), 1e9, 1e20,
         InterfaceClosure::Impedance, 1.0}};
    return rp;
}

/// RP3: mild two-phase shock tube used for the finite-rate pressure
/// relaxation sweep.
inline RiemannProblem preset_rp3() {
    RiemannProblem rp{
        {0.55, 1.0, 0.2, 0.0, 0.0, 1.0, 1.0},
        {0.45, 0.125, 2.0, 0.0, 0.0, 0.1, 0.1},
        0.6,
        0.15,
        0.0,
        1.0,
        {EosPhase(2.0, 2.0), EosPhase(1.4, 0.0), 1e9, 1e20,
         InterfaceClosure::Impedance, 1.0}};
    return rp;
}

}  // namespace bnrelax
