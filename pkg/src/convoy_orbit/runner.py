"""Run orchestration: scenario runs with metrics output, and the
constant-gain versus curvature-weighted guidance comparison."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from .config import ScenarioConfig
from .geometry import Direction, curvature, orbit_coords
from .guidance import GuidanceGains, offset_heading
from .metrics_io import MetricsTable, MetricsWriter, summarize, write_summary
from .sim_engine import FixedOrbitTrace, Simulation, n_ticks_for, stationary_orbit, track_fixed_orbit


class OutputError(OSError):
    """File-system failure while writing run outputs."""


def _prepare_dir(out_dir) -> Path:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"{out}: cannot create output directory: {exc.strerror or exc}") from exc
    return out


@dataclass
class RunResult:
    metrics_path: Path
    summary_path: Path
    summary: Dict[str, object]
    table: MetricsTable
    jsonl_path: Optional[Path] = None


def run(config: ScenarioConfig, out_dir=None, jsonl: bool = False) -> RunResult:
    """Simulate ``config`` for its full duration and write ``metrics.csv`` and
    ``summary.json`` (plus ``metrics.jsonl`` when asked) into ``out_dir``."""
    if out_dir is None:
        if config.output_dir is None:
            raise ValueError("no output directory given and scenario sets no output_dir")
        out_dir = config.output_dir
    out = _prepare_dir(out_dir)
    metrics_path = out / "metrics.csv"
    jsonl_path = out / "metrics.jsonl" if jsonl else None
    sim = Simulation(config)
    n_convoy = len(sim.convoy.positions(0.0))
    rows: List[List[float]] = []
    try:
        writer = MetricsWriter(metrics_path, len(sim.agents), n_convoy, jsonl_path)
    except OSError as exc:
        raise OutputError(f"{metrics_path}: {exc}") from exc
    try:
        with writer:
            sim.run(callback=lambda rec: rows.append(writer.write(rec)))
    except OSError as exc:
        raise OutputError(f"{metrics_path}: write failed: {exc.strerror or exc}") from exc
    table = MetricsTable.from_rows(writer.columns, rows)
    summary = summarize(table, config)
    summary_path = out / "summary.json"
    try:
        write_summary(summary, summary_path)
    except OSError as exc:
        raise OutputError(f"{summary_path}: write failed: {exc.strerror or exc}") from exc
    return RunResult(metrics_path, summary_path, summary, table, jsonl_path)


# guidance comparison setup
CMP_A, CMP_B = 2.5, 1.0
CMP_SPEED = 0.4
CMP_OMEGA_MAX = 1.5
CMP_K_PSI = 1.0
CMP_K_GAMMA = 2.0
CMP_DT = 0.02
CMP_ORBITS = 8
SETTLE_BAND = 0.05
HIGH_CURVATURE_HALF_WIDTH = math.pi / 8


def high_curvature_mask(s_A: np.ndarray, half_width: float = HIGH_CURVATURE_HALF_WIDTH) -> np.ndarray:
    """True where ``s_A`` lies within ``half_width`` of 0 or pi (the ends of the major axis)."""
    d0 = np.abs(np.remainder(s_A + math.pi, 2 * math.pi) - math.pi)
    dpi = np.abs(np.remainder(s_A, 2 * math.pi) - math.pi)
    return (d0 <= half_width) | (dpi <= half_width)


def settle_index(gamma_A: np.ndarray, window: int, band: float = SETTLE_BAND) -> Optional[int]:
    """First sample from which ``|gamma - 1| < band`` holds for ``window`` samples."""
    ok = (np.abs(gamma_A - 1.0) < band).astype(np.int64)
    if window <= 0 or len(ok) < window:
        return None
    run_sum = np.convolve(ok, np.ones(window, dtype=np.int64), mode="valid")
    hits = np.flatnonzero(run_sum == window)
    return int(hits[0]) if len(hits) else None


def windowed_max(trace: FixedOrbitTrace, start: Optional[int]) -> Optional[float]:
    """Max ``|gamma - 1|`` over high-curvature samples from ``start`` on."""
    if start is None:
        return None
    mask = high_curvature_mask(trace.s_A[start:])
    if not mask.any():
        return None
    return float(np.abs(trace.gamma_A[start:][mask] - 1.0).max())


@dataclass
class AgentComparison:
    label: str
    k_gamma: float
    curvature_weighted: bool
    psi_O_initial: float
    settle_time: Optional[float]
    settled_hc_max: Optional[float]
    steady_hc_max: float
    steady_max: float


@dataclass
class GuidanceComparison:
    kappa_min: float
    period: float
    duration: float
    constant: AgentComparison
    weighted: AgentComparison

    def to_dict(self) -> Dict[str, object]:
        return asdict(self)


def compare_guidance(orbits: int = CMP_ORBITS, dt: float = CMP_DT):
    """Fly a constant-gain agent and a curvature-weighted agent around the same
    stationary ellipse at constant speed, both starting on the orbit at
    ``s = pi/2`` with tangent heading.

    Returns ``(report, traces)`` where ``traces`` maps ``"constant"`` and
    ``"weighted"`` to :class:`FixedOrbitTrace`. The steady-state window is the
    last two orbits.
    """
    orbit = stationary_orbit(CMP_A, CMP_B)
    kappa_min = curvature(0.5 * math.pi, orbit.axes)[0]
    s_v = 2.0 * CMP_SPEED / (CMP_A + CMP_B)
    period = 2.0 * math.pi / s_v
    duration = orbits * period
    pose = (0.0, CMP_B, math.pi)
    d_c = Direction.CCW
    window = int(math.ceil(period / dt))
    traces = {}
    agents = {}
    for label, weighted, k_gamma in (("constant", False, CMP_K_GAMMA),
                                     ("weighted", True, CMP_K_GAMMA / kappa_min)):
        gains = GuidanceGains(k_gamma, CMP_K_PSI, CMP_OMEGA_MAX, curvature_weighted=weighted)
        trace = track_fixed_orbit(orbit, gains, d_c, CMP_SPEED, pose, dt, duration)
        c0 = orbit_coords(pose[:2], orbit, d_c)
        psi_O0 = offset_heading(c0.s_A, c0.gamma_A, orbit.axes, d_c, gains)
        k_set = settle_index(trace.gamma_A, window)
        steady = max(0, len(trace.t) - 2 * window)
        agents[label] = AgentComparison(
            label, k_gamma, weighted, psi_O0,
            None if k_set is None else float(trace.t[k_set]),
            windowed_max(trace, k_set),
            windowed_max(trace, steady),
            float(np.abs(trace.gamma_A[steady:] - 1.0).max()),
        )
        traces[label] = trace
    report = GuidanceComparison(kappa_min, period, duration, agents["constant"], agents["weighted"])
    return report, traces


def write_guidance_comparison(out_dir, orbits: int = CMP_ORBITS) -> GuidanceComparison:
    """Run :func:`compare_guidance` and write ``comparison.json``,
    ``comparison.csv`` and the two SVG panels into ``out_dir``."""
    from .plotting import plot_guidance_comparison

    out = _prepare_dir(out_dir)
    report, traces = compare_guidance(orbits)
    path = out / "comparison.json"
    try:
        path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
        path = out / "comparison.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ("x", "y", "psi", "gamma_A", "s_A")
            w.writerow(["t"] + [f"{lab}_{c}" for lab in traces for c in cols])
            t = traces["constant"].t
            for k in range(len(t)):
                row = [t[k]]
                for tr in traces.values():
                    row += [tr.x[k], tr.y[k], tr.psi[k], tr.gamma_A[k], tr.s_A[k]]
                w.writerow([format(float(v), ".17g") for v in row])
        plot_guidance_comparison(traces, stationary_orbit(CMP_A, CMP_B), out)
    except OSError as exc:
        raise OutputError(f"{path}: write failed: {exc.strerror or exc}") from exc
    return report
