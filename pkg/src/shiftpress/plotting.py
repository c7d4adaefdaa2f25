"""SVG figures for the CLI reports (pressure curve and dimension spectrum)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "shiftpress",  # stable element ids
    "svg.fonttype": "none",
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_pressure(ts, closed, cover, path: str | Path) -> Path:
    """T(t) from the transfer matrix with cover estimates overlaid."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        ts = np.asarray(ts, dtype=float)
        closed = np.asarray(closed, dtype=float)
        if np.isfinite(closed).any():
            ax.plot(ts, closed, color="k", label="transfer matrix")
        cover = np.asarray(cover, dtype=float)
        if np.isfinite(cover).any():
            ax.plot(ts, cover, "o", ms=3.5, mfc="none", color="C3", label="cover estimate")
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_xlabel("$t$")
        ax.set_ylabel("$T(t)$")
        ax.legend(frameon=False)
        return _save(fig, Path(path))


def plot_spectrum(curve, table, path: str | Path, t_range=(-3.0, 3.0)) -> Path:
    """Two panels: the pressure curve and the dimension spectrum."""
    with plt.rc_context(RC):
        fig, (a0, a1) = plt.subplots(1, 2, figsize=(7.0, 2.8))
        ts = np.linspace(*t_range, 121)
        a0.plot(ts, [curve(t) for t in ts], color="k")
        a0.axhline(0.0, color="0.6", lw=0.6)
        a0.set_xlabel("$t$")
        a0.set_ylabel("$T(t)$")
        a1.plot(table.column("alpha"), table.column("L_D"), color="k")
        a1.set_xlabel(r"$\alpha$")
        a1.set_ylabel(r"$L_D(\alpha)$")
        a1.set_ylim(bottom=0)
        fig.tight_layout()
        return _save(fig, Path(path))
