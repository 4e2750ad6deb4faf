"""Matplotlib figures for simulation reports (written to files, never shown)."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_trajectory(traj, path, title: str = "", dpi: int = 120):
    """State components against time, with Vm and spread on a log panel."""
    fig, (ax, ax2) = plt.subplots(
        2, 1, figsize=(6.4, 5.2), sharex=True, gridspec_kw={"height_ratios": [3, 1.4]}
    )
    for i in range(traj.states.shape[1]):
        ax.plot(traj.times, traj.states[:, i], lw=1.4, label=f"$x_{{{i + 1}}}$")
    ax.axhline(0.0, color="0.6", lw=0.6)
    ax.set_ylabel("$x_i(t)$")
    ax.legend(loc="best", fontsize=8, ncol=2, frameon=False)
    if title:
        ax.set_title(title)

    spread = np.maximum(traj.monitors["spread"], 1e-18)
    ax2.semilogy(traj.times, spread, color="k", lw=1.0, label="spread")
    ax2.semilogy(traj.times, np.abs(traj.monitors["Vm"]), color="tab:red", lw=1.0, ls="--", label="$V_m$")
    ax2.set_xlabel("$t$")
    ax2.legend(loc="best", fontsize=8, frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def plot_overview(results, path, dpi: int = 120):
    """One panel per experiment, side by side."""
    fig, axes = plt.subplots(1, len(results), figsize=(3.2 * len(results), 3.0), squeeze=False)
    for ax, res in zip(axes[0], results):
        traj = res.trajectory
        for i in range(traj.states.shape[1]):
            ax.plot(traj.times, traj.states[:, i], lw=1.2)
        ax.set_title(res.config.name, fontsize=10)
        ax.set_xlabel("$t$")
    axes[0][0].set_ylabel("$x_i(t)$")
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
