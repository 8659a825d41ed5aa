#!/usr/bin/env python3
"""Render the panel CSVs written by `usv-blf figures` into one PNG per group.

usage: plot_figures.py <figures-dir> [<png-dir>]
"""

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

PANELS = ["path", "tau", "eta", "e1", "nu", "e2"]
RUNS = ["P1", "P2", "P3"]


def load(path):
    with open(path) as f:
        header = f.readline().strip().split(",")
    data = np.genfromtxt(path, delimiter=",", skip_header=1)
    return {h: data[:, i] for i, h in enumerate(header)}


def bounds_style(ax, t, lo, hi):
    ax.plot(t, lo, "k--", lw=0.8)
    ax.plot(t, hi, "k--", lw=0.8)


def plot_group(src, group, dst):
    cols = {p: load(src / f"{group}_{p}.csv") for p in PANELS}
    fig = plt.figure(figsize=(14, 16))
    fig.suptitle(group)
    t = cols["eta"]["t"]

    ax = fig.add_subplot(5, 3, 1)
    p = cols["path"]
    ax.plot(p["y_d"], p["x_d"], "k", lw=1.2, label="desired")
    for r in RUNS:
        ax.plot(p[f"y_{r}"], p[f"x_{r}"], lw=0.9, label=r)
    ax.set_xlabel("y [m]")
    ax.set_ylabel("x [m]")
    ax.set_aspect("equal", "datalim")
    ax.legend(fontsize=7)

    for i, (axis, unit) in enumerate([("x", "m"), ("y", "m"), ("psi", "rad")]):
        ax = fig.add_subplot(5, 3, 4 + i)
        e = cols["eta"]
        ax.plot(t, e[f"{axis}_d"], "k", lw=1.2)
        bounds_style(ax, t, e[f"{axis}_lower"], e[f"{axis}_upper"])
        for r in RUNS:
            ax.plot(t, e[f"{axis}_{r}"], lw=0.9)
        ax.set_ylabel(f"{axis} [{unit}]")

        ax = fig.add_subplot(5, 3, 7 + i)
        e1 = cols["e1"]
        bounds_style(ax, t, e1[f"e1{axis}_lower"], e1[f"e1{axis}_upper"])
        for r in RUNS:
            ax.plot(t, e1[f"e1{axis}_{r}"], lw=0.9)
        ax.set_ylabel(f"e1 {axis}")

    for i, v in enumerate(["u", "v", "r"]):
        ax = fig.add_subplot(5, 3, 10 + i)
        nu = cols["nu"]
        ax.plot(t, nu[f"{v}_d"], "k", lw=1.2)
        for r in RUNS:
            ax.plot(t, nu[f"{v}_{r}"], lw=0.9)
        ax.set_ylabel(v)

        ax = fig.add_subplot(5, 3, 13 + i)
        tau = cols["tau"]
        bounds_style(ax, t, tau[f"tau{i + 1}_min"], tau[f"tau{i + 1}_max"])
        for r in RUNS:
            ax.plot(t, tau[f"tau{i + 1}_{r}"], lw=0.9)
        ax.set_ylabel(f"tau{i + 1}")
        ax.set_xlabel("t [s]")

    fig.tight_layout()
    out = dst / f"{group}.png"
    fig.savefig(out, dpi=110)
    plt.close(fig)
    return out


def main():
    if len(sys.argv) < 2:
        sys.exit(__doc__)
    src = Path(sys.argv[1])
    dst = Path(sys.argv[2]) if len(sys.argv) > 2 else src
    dst.mkdir(parents=True, exist_ok=True)
    groups = sorted({f.name.rsplit("_", 1)[0] for f in src.glob("*_path.csv")})
    if not groups:
        sys.exit(f"no panel files in {src}")
    for g in groups:
        print(plot_group(src, g, dst))


if __name__ == "__main__":
    main()
