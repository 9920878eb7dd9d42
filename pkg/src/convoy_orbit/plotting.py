"""Static SVG panels for runs and for the guidance comparison.

Figures are built on a bare :class:`matplotlib.figure.Figure` (no pyplot
state) and saved with a fixed hash salt and no date stamp, so identical
inputs give byte-identical files.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from .geometry import OrbitSpec  # noqa: E402
from .metrics_io import MetricsTable, read_metrics_csv  # noqa: E402

PANELS = ("trajectories", "gamma", "separation", "speed", "turn_rate", "altitude")

_RC = {"svg.hashsalt": "convoy-orbit", "svg.fonttype": "path"}


def _save(fig: Figure, path: Path) -> Path:
    with matplotlib.rc_context(_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def ellipse_outline(center, tilt: float, a: float, b: float, n: int = 361) -> np.ndarray:
    """Global-frame points on the ellipse, shape (n, 2)."""
    s = np.linspace(0.0, 2.0 * math.pi, n)
    x, y = a * np.cos(s), b * np.sin(s)
    c, sn = math.cos(tilt), math.sin(tilt)
    return np.column_stack([center[0] + c * x - sn * y, center[1] + sn * x + c * y])


def _time_panel(table: MetricsTable, field: str, ylabel: str, path: Path,
                hlines=()) -> Path:
    fig = Figure(figsize=(7, 3.5))
    ax = fig.add_subplot()
    t = table["t"]
    for i in range(1, table.n_agents + 1):
        ax.plot(t, table.agent(i, field), lw=1, label=f"agent {i}")
    for y in hlines:
        ax.axhline(y, color="k", ls="--", lw=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel(ylabel)
    ax.grid(True, lw=0.3)
    if table.n_agents:
        ax.legend(fontsize=7, ncol=min(table.n_agents, 4))
    fig.tight_layout()
    return _save(fig, path)


def _trajectory_panel(table: MetricsTable, path: Path) -> Path:
    fig = Figure(figsize=(6, 6))
    ax = fig.add_subplot()
    for j in range(1, table.n_convoy + 1):
        ax.plot(table[f"T{j}_x"], table[f"T{j}_y"], color="0.5", lw=1,
                label="convoy" if j == 1 else None)
        if len(table.data):
            ax.plot(table[f"T{j}_x"][-1], table[f"T{j}_y"][-1], "s", color="0.3", ms=4)
    for i in range(1, table.n_agents + 1):
        ax.plot(table.agent(i, "x"), table.agent(i, "y"), lw=1, label=f"agent {i}")
    if len(table.data):
        last = table.data[-1]
        col = table.columns.index
        pts = ellipse_outline((last[col("orbit_cx")], last[col("orbit_cy")]),
                              last[col("orbit_theta_E")], last[col("orbit_a")], last[col("orbit_b")])
        ax.plot(pts[:, 0], pts[:, 1], "k--", lw=1, label="final orbit")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.grid(True, lw=0.3)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, path)


def emit_plots(metrics_path, out_dir, D_Th: float = 0.1) -> List[Path]:
    """Render the six run panels from a metrics CSV into ``out_dir``."""
    table = read_metrics_csv(metrics_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        _trajectory_panel(table, out / "trajectories.svg"),
        _time_panel(table, "gamma_A", "gamma", out / "gamma.svg", hlines=(1.0,)),
        _time_panel(table, "D_s", "D_s [rad]", out / "separation.svg", hlines=(-D_Th, D_Th)),
        _time_panel(table, "V_cmd", "V [m/s]", out / "speed.svg"),
        _time_panel(table, "omega_cmd", "omega [rad/s]", out / "turn_rate.svg"),
        _time_panel(table, "z", "z [m]", out / "altitude.svg"),
    ]


def plot_guidance_comparison(traces: Dict[str, object], orbit: OrbitSpec, out_dir) -> List[Path]:
    out = Path(out_dir)
    fig = Figure(figsize=(7, 3.5))
    ax = fig.add_subplot()
    for label, tr in traces.items():
        ax.plot(tr.t, tr.gamma_A, lw=1, label=label)
    ax.axhline(1.0, color="k", ls="--", lw=0.8)
    ax.set_xlabel("t [s]")
    ax.set_ylabel("gamma")
    ax.grid(True, lw=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    p1 = _save(fig, out / "comparison_gamma.svg")

    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot()
    pts = ellipse_outline(orbit.center, orbit.tilt, orbit.axes.a, orbit.axes.b)
    ax.plot(pts[:, 0], pts[:, 1], "k--", lw=1, label="orbit")
    for label, tr in traces.items():
        ax.plot(tr.x, tr.y, lw=1, label=label)
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(fontsize=8)
    fig.tight_layout()
    p2 = _save(fig, out / "comparison_trajectories.svg")
    return [p1, p2]
