"""Metrics persistence and run summaries.

CSV layout (one row per tick): ``t``; then per agent ``a{i}_x, a{i}_y,
a{i}_psi, a{i}_z, a{i}_V_cmd, a{i}_omega_cmd, a{i}_gamma_A, a{i}_s_A,
a{i}_D_s``; then the orbit block; then convoy positions; then the per-agent
cooperation flags. Floats are written with 17 significant digits so a
read-back is bit-exact.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .sim_engine import MetricsRecord

AGENT_FIELDS = ("x", "y", "psi", "z", "V_cmd", "omega_cmd", "gamma_A", "s_A", "D_s")
ORBIT_FIELDS = ("orbit_cx", "orbit_cy", "orbit_theta_E", "orbit_a", "orbit_b", "orbit_vx", "orbit_vy")
FLAG_FIELDS = ("fl_O", "fl_R", "fl_H")


class MetricsFormatError(ValueError):
    pass


def header(n_agents: int, n_convoy: int) -> List[str]:
    cols = ["t"]
    for i in range(1, n_agents + 1):
        cols += [f"a{i}_{f}" for f in AGENT_FIELDS]
    cols += list(ORBIT_FIELDS)
    for j in range(1, n_convoy + 1):
        cols += [f"T{j}_x", f"T{j}_y"]
    for i in range(1, n_agents + 1):
        cols += [f"a{i}_{f}" for f in FLAG_FIELDS]
    return cols


def record_to_row(rec: MetricsRecord) -> List[float]:
    row = [rec.t]
    for a in rec.agents:
        row += a[:len(AGENT_FIELDS)]
    o = rec.orbit
    row += [o.center[0], o.center[1], o.tilt, o.axes.a, o.axes.b,
            o.center_velocity[0], o.center_velocity[1]]
    for p in rec.convoy:
        row += [p[0], p[1]]
    for a in rec.agents:
        row += [float(a.fl_O), float(a.fl_R), float(a.fl_H)]
    return row


def _fmt(v: float) -> str:
    return format(v, ".17g")


class MetricsWriter:
    """Stream records to CSV (and optionally a JSON-lines mirror)."""

    def __init__(self, path, n_agents: int, n_convoy: int, jsonl_path=None):
        self.columns = header(n_agents, n_convoy)
        self.path = Path(path)
        try:
            self._fh = open(self.path, "w", newline="")
            self._jfh = open(jsonl_path, "w") if jsonl_path is not None else None
        except OSError as exc:
            raise OSError(f"cannot open metrics output {exc.filename}: {exc.strerror}") from exc
        self._fh.write(",".join(self.columns) + "\n")

    def write(self, rec: MetricsRecord) -> List[float]:
        row = record_to_row(rec)
        self._fh.write(",".join(_fmt(v) for v in row) + "\n")
        if self._jfh is not None:
            self._jfh.write(json.dumps(dict(zip(self.columns, row))) + "\n")
        return row

    def close(self) -> None:
        self._fh.close()
        if self._jfh is not None:
            self._jfh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class MetricsTable:
    columns: List[str]
    data: np.ndarray  # (n_ticks, n_columns)

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self.data[:, self.columns.index(name)]
        except ValueError:
            raise KeyError(name) from None

    @property
    def n_agents(self) -> int:
        return sum(1 for c in self.columns if c.endswith("_gamma_A"))

    @property
    def n_convoy(self) -> int:
        return sum(1 for c in self.columns if c.startswith("T") and c.endswith("_x"))

    def agent(self, i: int, name: str) -> np.ndarray:
        return self[f"a{i}_{name}"]

    def agent_matrix(self, name: str) -> np.ndarray:
        """(n_ticks, n_agents) array of one per-agent field."""
        n = self.n_agents
        if n == 0:
            return np.empty((len(self.data), 0))
        return np.column_stack([self.agent(i, name) for i in range(1, n + 1)])

    @classmethod
    def from_rows(cls, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> "MetricsTable":
        data = np.array(list(rows), dtype=float).reshape(-1, len(columns))
        return cls(list(columns), data)


def read_metrics_csv(path) -> MetricsTable:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            cols = next(reader)
        except StopIteration:
            raise MetricsFormatError(f"{path}: empty file (no header row)") from None
        if not cols or cols[0] != "t":
            raise MetricsFormatError(f"{path}: row 1: header must start with 't'")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(cols):
                raise MetricsFormatError(
                    f"{path}: row {lineno}: expected {len(cols)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise MetricsFormatError(f"{path}: row {lineno}: {exc}") from None
    table = MetricsTable.from_rows(cols, rows)
    expected = header(table.n_agents, table.n_convoy)
    if cols != expected:
        raise MetricsFormatError(f"{path}: row 1: unexpected column layout")
    return table


def formation_index(table: MetricsTable, D_Th: float) -> Optional[int]:
    """First tick with every flag set and every ``|D_s| < D_Th``."""
    n = table.n_agents
    if n == 0 or len(table.data) == 0:
        return None
    ok = np.ones(len(table.data), dtype=bool)
    for f in FLAG_FIELDS:
        ok &= table.agent_matrix(f).min(axis=1) > 0.5
    ok &= np.abs(table.agent_matrix("D_s")).max(axis=1) < D_Th
    hits = np.flatnonzero(ok)
    return int(hits[0]) if len(hits) else None


def constraint_violations(table: MetricsTable, V_A_min: float, V_A_max: float,
                          omega_max: float) -> int:
    """Number of ticks where any agent's speed or turn-rate command is out of bounds."""
    if table.n_agents == 0 or len(table.data) == 0:
        return 0
    V = table.agent_matrix("V_cmd")
    w = table.agent_matrix("omega_cmd")
    bad = (V < V_A_min) | (V > V_A_max) | (np.abs(w) > omega_max)
    return int(bad.any(axis=1).sum())


def summarize(table: MetricsTable, cfg) -> Dict[str, object]:
    idx = formation_index(table, cfg.D_Th)
    out: Dict[str, object] = {
        "scenario": cfg.name,
        "ticks": int(len(table.data)),
        "dt": cfg.dt,
        "duration": cfg.duration,
        "n_agents": table.n_agents,
        "settling_time": None,
        "max_abs_gamma_error_after_settling": None,
        "max_abs_D_s_after_settling": None,
        "constraint_violations": constraint_violations(table, cfg.V_A_min, cfg.V_A_max, cfg.omega_max),
    }
    if idx is not None:
        out["settling_time"] = float(table["t"][idx])
        out["max_abs_gamma_error_after_settling"] = float(
            np.abs(table.agent_matrix("gamma_A")[idx:] - 1.0).max())
        out["max_abs_D_s_after_settling"] = float(np.abs(table.agent_matrix("D_s")[idx:]).max())
    return out


def write_summary(summary: Dict[str, object], path) -> None:
    Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")


def finite_or_none(v: float) -> Optional[float]:
    return v if math.isfinite(v) else None
