#!/usr/bin/env python3
"""Quick-look plots for pbec CSV outputs.

Usage:
    python docs/plot_outputs.py sweep   OUTDIR   # sweep_pump.csv
    python docs/plot_outputs.py phase   OUTDIR   # phase_map.csv
    python docs/plot_outputs.py g1      OUTDIR   # coherence_*.csv

Writes PNGs next to the CSVs.  Requires matplotlib (not a package dependency).
"""

import sys
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _load(path):
    rows = [l for l in Path(path).read_text().splitlines()
            if l and not l.startswith("#")]
    header = rows[0].split(",")
    data = np.array([[_maybe_float(x) for x in r.split(",")] for r in rows[1:]],
                    dtype=object)
    return header, data


def _maybe_float(x):
    try:
        return float(x)
    except ValueError:
        return x


def plot_sweep(outdir):
    header, data = _load(Path(outdir) / "sweep_pump.csv")
    rate = data[:, 0].astype(float)
    n_cols = [k for k, h in enumerate(header) if h.startswith("n_") and h != "n_tot"]
    fig, ax = plt.subplots(figsize=(5, 4))
    for k in n_cols[:4]:
        ax.loglog(data[:, 1].astype(float), data[:, k].astype(float),
                  label=header[k])
    ax.set_xlabel("total photon number")
    ax.set_ylabel("level population")
    ax.legend()
    fig.tight_layout()
    fig.savefig(Path(outdir) / "sweep_pump.png", dpi=150)
    print("wrote", Path(outdir) / "sweep_pump.png")


def plot_phase(outdir):
    header, data = _load(Path(outdir) / "phase_map.csv")
    lams = sorted(set(data[:, 0].astype(float)))
    fig, axes = plt.subplots(1, len(lams), figsize=(4 * len(lams), 3.2),
                             sharey=True)
    axes = np.atleast_1d(axes)
    for ax, lam in zip(axes, lams):
        sel = data[:, 0].astype(float) == lam
        ax.semilogx(data[sel, 1].astype(float), data[sel, 4].astype(float), "o-")
        gamma = float(data[sel, 2][0])
        ax.set_title(f"cutoff {lam:.0f} nm, gamma = {gamma:.2f}")
        ax.set_xlabel("pump rate [1/s]")
    axes[0].set_ylabel("ground-mode fraction")
    fig.tight_layout()
    fig.savefig(Path(outdir) / "phase_map.png", dpi=150)
    print("wrote", Path(outdir) / "phase_map.png")


def plot_g1(outdir):
    for mode in ("multimode", "single"):
        path = Path(outdir) / f"coherence_{mode}.csv"
        if not path.exists():
            continue
        _, data = _load(path)
        tau = data[:, 0].astype(float)
        vis = data[:, 3].astype(float)
        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot(tau * 1e12, vis)
        ax.set_xlabel("delay [ps]")
        ax.set_ylabel("|g1|")
        fig.tight_layout()
        fig.savefig(path.with_suffix(".png"), dpi=150)
        print("wrote", path.with_suffix(".png"))


if __name__ == "__main__":
    if len(sys.argv) != 3 or sys.argv[1] not in ("sweep", "phase", "g1"):
        sys.exit(__doc__)
    {"sweep": plot_sweep, "phase": plot_phase, "g1": plot_g1}[sys.argv[1]](sys.argv[2])
