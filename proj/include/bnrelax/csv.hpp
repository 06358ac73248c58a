#pragma once

// CSV writers: RFC-4180-style, '.' decimal separator, 17 significant digits
// so round trips are exact.

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "bnrelax/eos.hpp"
#include "bnrelax/fv1d.hpp"
#include "bnrelax/relax.hpp"

namespace bnrelax {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Trajectory of an ODE run: t,u1,u2,p1,p2,alpha1,dt,iterations.
inline void write_trajectory_csv(const std::string& path,
                                 const std::vector<TrajectoryPoint>& trajectory) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "t,u1,u2,p1,p2,alpha1,dt,iterations\n";
    for (const TrajectoryPoint& p : trajectory) {
        out << format_full(p.t) << ',' << format_full(p.state.u1) << ','
            << format_full(p.state.u2) << ',' << format_full(p.state.p1) << ','
            << format_full(p.state.p2) << ',' << format_full(p.state.alpha1) << ','
            << format_full(p.dt) << ',' << p.iterations << '\n';
    }
}

/// Profile snapshot of a cell field:
/// x,alpha1,rho1,rho2,u1,u2,p1,p2,p_mix (one row per cell).
inline void write_snapshot_csv(const std::string& path, const CellField& field,
                               const EosPhase& eos1, const EosPhase& eos2) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    out << "x,alpha1,rho1,rho2,u1,u2,p1,p2,p_mix\n";
    for (long i = 0; i < field.grid.n_cells; ++i) {
        const CellPrimState w = cons_to_prim(field.cell(i), eos1, eos2);
        const double p_mix = w.alpha1 * w.p1 + (1.0 - w.alpha1) * w.p2;
        out << format_full(field.grid.center(i)) << ',' << format_full(w.alpha1) << ','
            << format_full(w.rho1) << ',' << format_full(w.rho2) << ','
            << format_full(w.u1) << ',' << format_full(w.u2) << ','
            << format_full(w.p1) << ',' << format_full(w.p2) << ','
            << format_full(p_mix) << '\n';
    }
}

/// Two-column-plus table used by the convergence study.
inline void write_table_csv(const std::string& path,
                            const std::vector<std::string>& header,
                            const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    for (std::size_t c = 0; c < header.size(); ++c)
        out << header[c] << (c + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            out << format_full(row[c]) << (c + 1 < row.size() ? "," : "\n");
}

}  // namespace bnrelax
