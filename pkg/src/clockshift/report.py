"""Figure rendering for the report path.

Each table-producing command can render a matplotlib figure next to its
delimited output; everything uses the Agg backend so the CLI stays headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .curves import ResonanceCurve
from .experiments import FitResult, Table
from .shifts import ShiftResult


def save_figure(fig, path) -> None:
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)


def curve_figure(quantum: ResonanceCurve, semiclassical: ResonanceCurve,
                 shifts: ShiftResult | None = None):
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(quantum.deltas, quantum.p12, "-", lw=1.2, label="quantum")
    ax.plot(semiclassical.deltas, semiclassical.p12, "--", lw=1.2, label="semiclassical")
    if shifts is not None:
        ax.axvline(shifts.delta_max, color="0.4", lw=0.8, ls=":")
        half = 0.5 * shifts.peak_height
        ax.plot([shifts.hh_left, shifts.hh_right], [half, half], "k.-", ms=4, lw=0.8,
                label="half height")
    ax.set_xlabel(r"detuning $\Delta$ (rad/s)")
    ax.set_ylabel(r"$P_{12}$")
    ax.set_title(f"{quantum.geometry} resonance curve")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    return fig


def sweep_figure(table: Table):
    x = np.array([row[0] for row in table.rows], dtype=float)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name in ("delta_max_frac", "delta_hh_frac"):
        if name not in table.columns:
            continue
        idx = table.columns.index(name)
        y = np.array([row[idx] for row in table.rows], dtype=float)
        ax.plot(x, y, "o-", ms=3, lw=1.0, label=name)
    positive_x = np.all(x > 0)
    if positive_x and table.metadata.get("sweep_spacing") == "log":
        ax.set_xscale("log")
    finite = [abs(row[table.columns.index(c)]) for c in ("delta_max_frac", "delta_hh_frac")
              if c in table.columns for row in table.rows
              if not math.isnan(row[table.columns.index(c)])]
    if finite and min(finite) > 0:
        ax.set_yscale("log")
    ax.set_xlabel(table.columns[0])
    ax.set_ylabel("fractional frequency offset")
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, which="both")
    return fig


def grid_figure(table: Table):
    ls = sorted({row[0] for row in table.rows})
    ns = sorted({row[1] for row in table.rows})
    idx = table.columns.index("delta_hh_frac")
    z = np.full((len(ls), len(ns)), np.nan)
    for row in table.rows:
        z[ls.index(row[0]), ns.index(row[1])] = row[idx]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    mesh = ax.pcolormesh(ns, np.array(ls) * 1e3, np.log10(z), shading="nearest")
    fig.colorbar(mesh, ax=ax, label=r"$\log_{10}$ fractional offset")
    ax.set_xlabel("gap ratio N = L/l")
    ax.set_ylabel("field width l (mm)")
    return fig


def fit_figure(xs, ys, fits: tuple[FitResult, FitResult], x_name: str, y_name: str):
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    grid = np.geomspace(xs.min(), xs.max(), 200)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.loglog(xs, ys, "ks", ms=5, label="data")
    free, fixed = fits
    ax.loglog(grid, free.predict(grid), "-", lw=1.0,
              label=f"free fit p={free.p:.3f}")
    ax.loglog(grid, fixed.predict(grid), "--", lw=1.0, label="inverse-square fit")
    ax.set_xlabel(x_name)
    ax.set_ylabel(y_name)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3, which="both")
    return fig
