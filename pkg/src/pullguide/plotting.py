"""Figures for traces and seed comparisons, rendered off-screen to files."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .sim.trace import Trace  # noqa: E402

_STYLE = {"figure.dpi": 110, "axes.grid": True, "grid.alpha": 0.3, "font.size": 9}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def plot_trajectory(trace: Trace, path, footprint_half_width: float = 0.35) -> Path:
    """Top view: base, desired EE, desired human and true human positions."""
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(7, 5))
        ax.plot(trace["base_x"], trace["base_y"], lw=1.6, label="base")
        ax.plot(trace["ee_hat_x"], trace["ee_hat_y"], lw=1.0, label="EE desired")
        ax.plot(trace["h_des_x"], trace["h_des_y"], "--", lw=1.0, label="human desired")
        ax.plot(trace["h_true_x"], trace["h_true_y"], lw=1.0, alpha=0.8, label="human")
        ax.set_aspect("equal", adjustable="datalim")
        ax.set_xlabel("x [m]")
        ax.set_ylabel("y [m]")
        ax.set_title(f"trajectory (footprint half-width {footprint_half_width:g} m)")
        ax.legend(loc="best", fontsize=8)
        return _save(fig, path)


def plot_pulling(trace: Trace, path, footprint_half_width: float = 0.35) -> Path:
    """Pulling vector, lateral stiffness and base gain over time."""
    t = trace["t"]
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(3, 1, figsize=(7, 6), sharex=True)
        ax = axes[0]
        ax.plot(t, trace["p_x"], lw=1.0, label="p_x")
        ax.plot(t, trace["p_y"], lw=1.0, label="p_y")
        ax.plot(t, trace["y_adaptive"], lw=1.0, label="y_adaptive")
        for s in (-1, 1):
            ax.axhline(s * footprint_half_width, color="0.5", ls=":", lw=0.8)
        ax.set_ylabel("[m]")
        ax.legend(loc="upper right", fontsize=8, ncol=3)
        axes[1].plot(t, trace["k_y_hat"], lw=1.0, color="C3")
        axes[1].set_ylabel("k_y [N/m]")
        axes[2].plot(t, trace["alpha_b"], lw=1.0, color="C2")
        axes[2].set_ylim(-0.05, 1.05)
        axes[2].set_ylabel("alpha_B")
        axes[2].set_xlabel("t [s]")
        return _save(fig, path)


def read_comparison(path) -> dict[str, dict[int, dict]]:
    """comparison.csv rows keyed by mode then seed."""
    out: dict[str, dict[int, dict]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["mode"], {})[int(row["seed"])] = row
    return out


def plot_comparison(path_csv, path) -> Path:
    """Per-seed mean |p_y| for both modes, paired, with a box summary."""
    table = read_comparison(path_csv)
    modes = [m for m in ("adaptive", "baseline") if m in table]
    seeds = sorted(set().union(*(table[m].keys() for m in modes)))
    with plt.rc_context(_STYLE):
        fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 4), width_ratios=(2, 1))
        for k, m in enumerate(modes):
            y = [float(table[m][s]["mean_py"]) if s in table[m] else np.nan for s in seeds]
            ax0.plot(seeds, y, "o-", color=f"C{k}", label=m)
        ax0.set_xlabel("seed")
        ax0.set_ylabel("mean |p_y| [m]")
        ax0.set_xticks(seeds)
        ax0.legend(fontsize=8)
        data = [[float(r["mean_py"]) for r in table[m].values() if r["mean_py"] not in ("", "nan")]
                for m in modes]
        ax1.boxplot(data, tick_labels=modes)
        ax1.set_ylabel("mean |p_y| [m]")
        return _save(fig, path)
