#!/usr/bin/env python3
"""Plot a relaxation trajectory CSV (t,u1,u2,p1,p2,alpha1,dt,iterations)."""
import csv
import sys

import matplotlib.pyplot as plt


def main() -> None:
    if len(sys.argv) < 2:
        sys.exit("usage: plot_trajectory.py <trajectory.csv> [out.png]")
    rows = list(csv.DictReader(open(sys.argv[1])))
    t = [float(r["t"]) for r in rows]

    fig, axes = plt.subplots(2, 2, figsize=(10, 7), sharex=True)
    axes[0, 0].plot(t, [float(r["u1"]) for r in rows], ".-", label="u1")
    axes[0, 0].plot(t, [float(r["u2"]) for r in rows], ".-", label="u2")
    axes[0, 0].set_ylabel("velocity [m/s]")
    axes[0, 1].plot(t, [float(r["p1"]) for r in rows], ".-", label="p1")
    axes[0, 1].plot(t, [float(r["p2"]) for r in rows], ".-", label="p2")
    axes[0, 1].set_ylabel("pressure [Pa]")
    axes[1, 0].plot(t, [float(r["alpha1"]) for r in rows], ".-", label="alpha1")
    axes[1, 0].set_ylabel("volume fraction")
    axes[1, 0].set_xlabel("t [s]")
    axes[1, 1].semilogy(t[1:], [float(r["dt"]) for r in rows[1:]], ".-", label="dt")
    axes[1, 1].set_ylabel("accepted dt [s]")
    axes[1, 1].set_xlabel("t [s]")
    for ax in axes.flat:
        ax.legend()
        ax.grid(alpha=0.3)
    fig.tight_layout()
    if len(sys.argv) > 2:
        fig.savefig(sys.argv[2], dpi=150)
    else:
        plt.show()


if __name__ == "__main__":
    main()
