"""Render experiment tables to figure files next to the CSV output.

Figures are a passive convenience view of the delimited output: they never
feed back into any computation and do not affect CSV bytes.
"""
from __future__ import annotations

from typing import Dict, List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .experiments import ResultTable


def render_table(table: ResultTable, experiment: str, path: str) -> None:
    """Dispatch on the experiment kind and write a PNG."""
    renderers = {
        "grid": _render_grid,
        "point": _render_grid,
        "orientation-sweep": _render_sweep,
        "geometry-mc": _render_mc,
        "array-compare": _render_compare,
    }
    renderer = renderers.get(experiment, _render_generic)
    fig = renderer(table)
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _finite(values: List[float]) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    arr[~np.isfinite(arr)] = np.nan
    return arr


def _render_grid(table: ResultTable):
    xs = np.asarray(table.column("x_m"), dtype=float)
    ys = np.asarray(table.column("y_m"), dtype=float)
    zs = _finite(table.column("root_speb_m"))
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    ux, uy = np.unique(xs), np.unique(ys)
    if len(ux) > 1 and len(uy) > 1 and len(xs) == len(ux) * len(uy):
        zgrid = zs.reshape(len(ux), len(uy)).T
        mesh = ax.pcolormesh(ux, uy, np.log10(zgrid), shading="nearest", cmap="viridis")
        contours = ax.contour(ux, uy, zgrid, colors="white", linewidths=0.6)
        ax.clabel(contours, fontsize=7, fmt="%.2g")
        fig.colorbar(mesh, ax=ax, label="log10 root SPEB (m)")
    else:
        ax.scatter(xs, ys, c=zs, cmap="viridis")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title("root SPEB")
    ax.set_aspect("equal")
    return fig


def _render_sweep(table: ResultTable):
    psi = np.asarray(table.column("psi_rad"), dtype=float)
    beta = np.asarray(table.column("beta_hz"), dtype=float)
    known = _finite(table.column("root_speb_known_m"))
    unknown = _finite(table.column("root_speb_unknown_m"))
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for b in np.unique(beta):
        sel = beta == b
        ax.semilogy(psi[sel], known[sel], "--", label=f"known, beta={b:g} Hz")
        ax.semilogy(psi[sel], unknown[sel], "-", label=f"unknown, beta={b:g} Hz")
    ax.set_xlabel("array orientation (rad)")
    ax.set_ylabel("root SPEB (m)")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    return fig


def _render_mc(table: ResultTable):
    gf1 = np.asarray(table.column("gf1_norm"), dtype=float)
    gf2 = np.asarray(table.column("gf2_norm"), dtype=float)
    known = _finite(table.column("root_speb_known_m"))
    unknown = _finite(table.column("root_speb_unknown_m"))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10.0, 4.2))
    ax1.plot(gf1, known, ".", ms=2, alpha=0.4)
    ax1.set_xlabel("normalized first-type factor")
    ax1.set_ylabel("orientation-known root SPEB (m)")
    ax2.plot(gf2, unknown - known, ".", ms=2, alpha=0.4)
    ax2.set_xlabel("normalized second-type factor")
    ax2.set_ylabel("degradation (m)")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    return fig


def _render_compare(table: ResultTable):
    psi = np.asarray(table.column("psi_rad"), dtype=float)
    counts = np.asarray(table.column("n_antennas"), dtype=int)
    ula_vals = _finite(table.column("speb_ula_m2"))
    uca_vals = _finite(table.column("speb_uca_m2"))
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for n in np.unique(counts):
        sel = counts == n
        ax.semilogy(psi[sel], ula_vals[sel], "-", label=f"linear, {n} elements")
        ax.semilogy(psi[sel], uca_vals[sel], "--", label=f"circular, {n} elements")
    ax.set_xlabel("array orientation (rad)")
    ax.set_ylabel("SPEB (m^2)")
    ax.legend(fontsize=7)
    ax.grid(True, alpha=0.3)
    return fig


def _render_generic(table: ResultTable):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    numeric: Dict[str, np.ndarray] = {}
    for name in table.columns:
        try:
            numeric[name] = _finite([float(v) for v in table.column(name)])
        except (TypeError, ValueError):
            continue
    if len(numeric) >= 2:
        names = list(numeric)
        ax.plot(numeric[names[0]], numeric[names[1]], ".")
        ax.set_xlabel(names[0])
        ax.set_ylabel(names[1])
    else:
        ax.text(0.5, 0.5, f"{len(table.rows)} rows", ha="center")
    ax.grid(True, alpha=0.3)
    return fig
