"""Diagnostic figures rendered alongside the delimited run output.

Generic chain diagnostics only: a scatter of the kept sample, coordinate
traces over the final stretch, and the first-coordinate autocorrelation.
Rendering uses the Agg backend so runs work headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402


def render_run_figures(samples, outdir, prefix: str, acf=None,
                       trace_window: int = 2000) -> list:
    """Write scatter/trace/ACF figures for one chain; returns the paths."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, ax = plt.subplots(figsize=(5, 5))
    ax.plot(samples[:, 0], samples[:, 1] if samples.shape[1] > 1 else samples[:, 0],
            ".", markersize=1, alpha=0.3)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2" if samples.shape[1] > 1 else "x1")
    ax.set_title("kept samples")
    path = outdir / f"{prefix}_scatter.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(str(path))

    window = samples[-trace_window:]
    n_coords = min(samples.shape[1], 4)
    fig, axes = plt.subplots(n_coords, 1, figsize=(7, 1.8 * n_coords),
                             sharex=True, squeeze=False)
    start = len(samples) - len(window)
    for k in range(n_coords):
        axes[k, 0].plot(np.arange(start, len(samples)), window[:, k],
                        linewidth=0.5)
        axes[k, 0].set_ylabel(f"x{k + 1}")
    axes[-1, 0].set_xlabel("iteration (kept)")
    fig.suptitle("trace (final stretch)")
    path = outdir / f"{prefix}_trace.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    paths.append(str(path))

    if acf is not None:
        acf = np.asarray(acf, dtype=float)
        fig, ax = plt.subplots(figsize=(6, 3))
        ax.vlines(np.arange(len(acf)), 0, acf, linewidth=1.5)
        ax.axhline(0.0, color="k", linewidth=0.5)
        ax.set_xlabel("lag")
        ax.set_ylabel("acf of x1")
        path = outdir / f"{prefix}_acf.png"
        fig.savefig(path, dpi=120, bbox_inches="tight")
        plt.close(fig)
        paths.append(str(path))
    return paths
