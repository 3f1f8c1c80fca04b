"""Render figures and tables from stored run outputs.

Five figure kinds:

``timeseries``       total energy and mass over time for one run
``mach_comparison``  normalized total energy and kinetic energy curves of
                     several runs on shared axes, labeled by Mach number
``profile_1d``       density and velocity profiles from a 1D snapshot
``heatmap_2d``       density heatmap from a 2D snapshot in a fixed
                     three-band palette (red high, green medium, blue low)
``eoc_table``        plain-text errors-and-orders table

Rendering is deterministic: fixed styles, no timestamps in the payload
(PDF/SVG date metadata is stripped explicitly).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LinearSegmentedColormap

from .io import (
    MissingDataError,
    list_snapshots,
    read_eoc_table,
    read_manifest,
    read_snapshot,
    read_timeseries,
)

KINDS = ("timeseries", "mach_comparison", "profile_1d", "heatmap_2d",
         "eoc_table")

THREE_BAND = LinearSegmentedColormap.from_list(
    "three_band", ["#2040c0", "#20a040", "#c03020"])

_RC = {
    "figure.figsize": (6.4, 3.6),
    "figure.dpi": 140,
    "savefig.dpi": 140,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "ekfigures",
}


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input run directories/files, kind, output path."""

    kind: str
    inputs: tuple
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose from {KINDS}")
        if not self.inputs:
            raise ValueError("at least one input is required")


def _save(fig, output: str):
    path = Path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    metadata = None
    if suffix == ".pdf":
        metadata = {"CreationDate": None}
    elif suffix == ".svg":
        metadata = {"Date": None}
    fig.savefig(path, metadata=metadata)
    plt.close(fig)


def _mach_label(run_dir) -> str:
    try:
        mach = read_manifest(run_dir)["config"]["mach"]
        return f"M={mach:g}"
    except (MissingDataError, KeyError):
        return Path(run_dir).name


def _render_timeseries(spec: FigureSpec):
    data = read_timeseries(spec.inputs[0])
    fig, (ax_e, ax_m) = plt.subplots(1, 2)
    ax_e.plot(data["t"], data["total_energy"], color="#2040c0")
    ax_e.set_xlabel("t")
    ax_e.set_ylabel("total energy")
    ax_m.plot(data["t"], data["mass"], color="#20a040")
    ax_m.set_xlabel("t")
    ax_m.set_ylabel("mass")
    fig.tight_layout()
    _save(fig, spec.output)


def normalized_energy_series(run_dirs):
    """(t, total_energy / total_energy[0], label) per run, for comparison."""
    series = []
    for run_dir in run_dirs:
        data = read_timeseries(run_dir)
        first = data["total_energy"][0]
        norm = data["total_energy"] / first if first != 0.0 \
            else data["total_energy"]
        series.append((data["t"], norm, _mach_label(run_dir)))
    return series


def _render_mach_comparison(spec: FigureSpec):
    fig, (ax_norm, ax_kin) = plt.subplots(1, 2)
    for run_dir in spec.inputs:
        data = read_timeseries(run_dir)
        label = _mach_label(run_dir)
        first = data["total_energy"][0]
        norm = data["total_energy"] / first if first != 0.0 \
            else data["total_energy"]
        ax_norm.plot(data["t"], norm, label=label)
        ax_kin.plot(data["t"], data["kinetic_energy"], label=label)
    ax_norm.set_xlabel("t")
    ax_norm.set_ylabel("normalized total energy")
    ax_kin.set_xlabel("t")
    ax_kin.set_ylabel("kinetic energy")
    ax_norm.legend()
    ax_kin.legend()
    fig.tight_layout()
    _save(fig, spec.output)


def _pick_snapshot(run_dir, options) -> dict:
    snaps = list_snapshots(run_dir)
    wanted = options.get("snapshot")
    if wanted is None:
        return read_snapshot(snaps[-1][1])
    for step, path in snaps:
        if step == wanted:
            return read_snapshot(path)
    raise MissingDataError(
        f"no snapshot for step {wanted} in {run_dir}; "
        f"available: {[s for s, _ in snaps]}")


def _render_profile_1d(spec: FigureSpec):
    snap = _pick_snapshot(spec.inputs[0], spec.options)
    if snap["dim"] != 1:
        raise MissingDataError("profile_1d needs a 1D snapshot")
    fig, (ax_rho, ax_u) = plt.subplots(1, 2)
    ax_rho.plot(snap["x"], snap["rho"], color="#2040c0")
    ax_rho.set_xlabel("x")
    ax_rho.set_ylabel("density")
    ax_u.plot(snap["x"], snap["u"], color="#c03020")
    ax_u.set_xlabel("x")
    ax_u.set_ylabel("velocity")
    fig.tight_layout()
    _save(fig, spec.output)


def _render_heatmap_2d(spec: FigureSpec):
    snap = _pick_snapshot(spec.inputs[0], spec.options)
    if snap["dim"] != 2:
        raise MissingDataError("heatmap_2d needs a 2D snapshot")
    n = int(round(np.sqrt(snap["rho"].size)))
    x = snap["x"].reshape(n, n)
    y = snap["y"].reshape(n, n)
    rho = snap["rho"].reshape(n, n)
    fig, ax = plt.subplots(figsize=(4.4, 3.6))
    mesh = ax.pcolormesh(x, y, rho, cmap=THREE_BAND, shading="gouraud")
    fig.colorbar(mesh, ax=ax, label="density")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    fig.tight_layout()
    _save(fig, spec.output)


def format_eoc_table(table: dict) -> str:
    """Fixed-width text table: K | err_rho | EOC | err_v | EOC."""
    lines = [f"{'K':>6} | {'e_rho':>10} | {'EOC':>5} | {'e_v':>10} | {'EOC':>5}"]
    lines.append("-" * len(lines[0]))
    n = len(table["K"])
    for i in range(n):
        eoc_rho = table.get("eoc_rho", [np.nan] * n)[i]
        eoc_v = table.get("eoc_v", [np.nan] * n)[i]
        fmt = lambda v: "   --" if np.isnan(v) else f"{v:5.2f}"
        lines.append(f"{int(table['K'][i]):>6} | {table['err_rho'][i]:>10.3e} "
                     f"| {fmt(eoc_rho)} | {table['err_v'][i]:>10.3e} "
                     f"| {fmt(eoc_v)}")
    return "\n".join(lines) + "\n"


def _render_eoc_table(spec: FigureSpec):
    text = format_eoc_table(read_eoc_table(spec.inputs[0]))
    path = Path(spec.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


_RENDERERS = {
    "timeseries": _render_timeseries,
    "mach_comparison": _render_mach_comparison,
    "profile_1d": _render_profile_1d,
    "heatmap_2d": _render_heatmap_2d,
    "eoc_table": _render_eoc_table,
}


def render(spec: FigureSpec) -> str:
    """Render one figure/table; returns the output path."""
    with matplotlib.rc_context(_RC):
        _RENDERERS[spec.kind](spec)
    return spec.output
