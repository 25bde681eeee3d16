"""Figure rendering for the CLI report path (matplotlib, file output only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_scan(k: np.ndarray, delta: np.ndarray, path: Path,
              title: str = "") -> Path:
    """delta(k) on log-k axes, written to a PNG next to the CSV."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(k, delta, "o-", ms=3)
    ax.set_xscale("log")
    ax.set_xlabel("k")
    ax.set_ylabel(r"$\delta(k)$ [rad]")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_profile(r: np.ndarray, delta: np.ndarray, path: Path,
                 amplitude: np.ndarray | None = None, title: str = "") -> Path:
    """delta(k, r) (and optionally A(k, r)) against radius."""
    n_ax = 2 if amplitude is not None else 1
    fig, axes = plt.subplots(n_ax, 1, figsize=(6.0, 3.0 * n_ax), sharex=True)
    axes = np.atleast_1d(axes)
    axes[0].plot(r, delta, lw=1.0)
    axes[0].set_ylabel(r"$\delta(k, r)$ [rad]")
    if title:
        axes[0].set_title(title)
    if amplitude is not None:
        axes[1].plot(r, amplitude, lw=1.0, color="tab:orange")
        axes[1].set_ylabel(r"$A(k, r)$")
    axes[-1].set_xlabel("r")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_bound(r: np.ndarray, Delta: np.ndarray, delta_abs: np.ndarray,
               path: Path, title: str = "") -> Path:
    """Majorant envelope against the actual |delta(k, r)|."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(r, Delta, label=r"majorant $\Delta(k, r)$")
    ax.plot(r, delta_abs, label=r"$|\delta(k, r)|$")
    ax.set_xlabel("r")
    ax.set_ylabel("rad")
    if title:
        ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
