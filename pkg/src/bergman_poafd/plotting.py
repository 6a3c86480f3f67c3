"""Matplotlib figures written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "savefig.dpi": 120,
}
COLORS = {"poafd": "tab:blue", "fourier": "tab:orange", "target": "black"}
# keep PNG bytes stable across runs
METADATA = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, metadata=METADATA)
    plt.close(fig)
    return path


def error_figure(result, path) -> Path:
    """Relative error against iteration for every run and method."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        several = len(result.runs) > 1
        for run in result.runs:
            if run.space is None:
                continue
            tag = f" (alpha={run.space.alpha:g})" if several and run.space.is_disc else ""
            for d in sorted(run.decompositions, key=lambda d: d.method):
                rel = d.relative_errors()
                if rel.size == 0:
                    continue
                k = np.arange(1, rel.size + 1)
                ax.semilogy(k, np.maximum(rel, 1e-17), marker="." if rel.size < 60 else None,
                            color=None if several else COLORS.get(d.method), label=d.method + tag)
        ax.set_xlabel("iteration")
        ax.set_ylabel(r"$\|f - S_n f\| / \|f\|$")
        ax.set_title(result.name)
        if ax.lines:
            ax.legend()
        return _save(fig, path)


def reconstruction_figure(run, path) -> Path:
    """Real part of target and reconstructions on a probe curve."""
    from .experiments import _probe_points

    x, z = _probe_points(run.space)
    target = run.decompositions[0].target
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(x, np.real(target(z)), color=COLORS["target"], lw=1.5, label="target")
        for d in sorted(run.decompositions, key=lambda d: d.method):
            ax.plot(x, np.real(d.reconstruct(z)), color=COLORS.get(d.method), lw=1.0, ls="--",
                    label=f"{d.method}, n={len(d.iterations)}")
        if run.space.is_disc:
            ax.set_xlabel(r"$\theta$ on $|z| = 0.95$")
        else:
            ax.set_xlabel(r"$x$ on $\mathrm{Im}\,z = 1$")
        ax.set_ylabel("Re f")
        ax.legend()
        return _save(fig, path)
