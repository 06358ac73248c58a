#!/usr/bin/env python3
"""Plot one or more profile snapshots (x,alpha1,rho1,rho2,u1,u2,p1,p2,p_mix)."""
import csv
import sys

import matplotlib.pyplot as plt


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit("usage: plot_profiles.py <profile.csv> [more.csv ...]")
    fig, axes = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    for path in sys.argv[1:]:
        rows = list(csv.DictReader(open(path)))
        x = [float(r["x"]) for r in rows]
        axes[0, 0].plot(x, [float(r["alpha1"]) for r in rows], label=path)
        axes[0, 1].semilogy(x, [float(r["p_mix"]) for r in rows], label=path)
        axes[1, 0].plot(x, [float(r["u1"]) for r in rows], label=path)
        axes[1, 1].plot(x, [float(r["rho1"]) for r in rows], label=path)
    axes[0, 0].set_ylabel("alpha1")
    axes[0, 1].set_ylabel("p_mix [Pa]")
    axes[1, 0].set_ylabel("u1 [m/s]")
    axes[1, 0].set_xlabel("x [m]")
    axes[1, 1].set_ylabel("rho1 [kg/m3]")
    axes[1, 1].set_xlabel("x [m]")
    for ax in axes.flat:
        ax.grid(alpha=0.3)
    axes[0, 0].legend(fontsize=7)
    fig.tight_layout()
    plt.show()


if __name__ == "__main__":
    main()
