"""Figure rendering for report outputs.

Everything draws through the Agg backend so runs work headless; each
function writes one PNG and returns its path.  Figures are a convenience
layer on top of the CSV/JSON artifacts -- nothing downstream depends on
them, and the CLI can skip them entirely.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "spectrum_figure",
    "ranking_figure",
    "msf_figure",
    "trajectory_figure",
]


def spectrum_figure(eigenvalues, gap_value, path):
    """Complex-plane scatter of the Laplacian spectrum with the gap marked."""
    lam = np.asarray(eigenvalues, dtype=complex)
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.axvline(0.0, color="0.8", lw=0.8)
    ax.axhline(0.0, color="0.8", lw=0.8)
    ax.plot(lam.real, lam.imag, "o", ms=7, mfc="none", color="tab:blue",
            label="eigenvalues")
    if gap_value is not None:
        gv = complex(gap_value)
        ax.plot([gv.real], [gv.imag], "x", ms=10, color="tab:red",
                label="spectral gap")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("Laplacian spectrum")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def ranking_figure(rows, path, max_rows: int = 20):
    """Horizontal bars of slope real parts for the top-ranked link edits."""
    rows = list(rows)[:max_rows]
    labels = [f"{r.src}\N{RIGHTWARDS ARROW}{r.dst}" for r in rows]
    values = [r.slope.real for r in rows]
    colors = ["tab:red" if v < 0 else "tab:green" if v > 0 else "0.6" for v in values]
    fig, ax = plt.subplots(figsize=(6.0, max(2.5, 0.3 * len(rows) + 1.2)))
    pos = np.arange(len(rows))[::-1]
    ax.barh(pos, values, color=colors)
    ax.set_yticks(pos)
    ax.set_yticklabels(labels, fontsize=8)
    ax.axvline(0.0, color="k", lw=0.8)
    ax.set_xlabel("gap slope (real part)")
    ax.set_title("link ranking: most gap-decreasing first")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def msf_figure(curve, path):
    """Master stability curve with the refined critical coupling marked."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(curve.nu, curve.exponents, yerr=curve.stderrs, fmt="o-",
                ms=3, lw=1.0, capsize=2, color="tab:blue")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.axvline(curve.alpha_c, color="tab:red", lw=1.0, ls="--",
               label=f"critical coupling = {curve.alpha_c:.4g}")
    ax.set_xlabel("coupling-times-eigenvalue")
    ax.set_ylabel("largest Lyapunov exponent")
    ax.legend(loc="best", fontsize=8)
    ax.set_title("master stability curve")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def trajectory_figure(traj, probe_series, probe_label, path, event_times=(),
                      threshold: float = 1e-1):
    """Two panels: sync error (log scale) and the probe component difference."""
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.5), sharex=True)
    err = np.maximum(traj.sync_error, 1e-18)   # keep the log axis finite
    ax1.semilogy(traj.times, err, lw=0.8, color="tab:blue")
    ax1.axhline(threshold, color="tab:red", lw=0.8, ls="--",
                label=f"failure threshold {threshold:g}")
    for t in event_times:
        ax1.axvline(t, color="0.4", lw=0.8, ls=":")
        ax2.axvline(t, color="0.4", lw=0.8, ls=":")
    ax1.set_ylabel("sync error")
    ax1.legend(loc="best", fontsize=8)
    ax2.plot(traj.times, probe_series, lw=0.6, color="tab:orange")
    ax2.set_xlabel("t")
    ax2.set_ylabel(probe_label)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
