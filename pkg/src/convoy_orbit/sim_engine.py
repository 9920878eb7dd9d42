"""Deterministic discrete-time simulation of the convoy-monitoring mission.

One call to :meth:`Simulation.tick` runs a full control-loop iteration:

1. advance the convoy script,
2. recompute the orbit,
3. deliver the packets broadcast on the previous tick,
4. compute every agent's heading-rate and speed commands,
5. integrate all agents over ``dt`` with the commands held,
6. log a :class:`MetricsRecord`.

Agents only read the previous tick's bus contents and the shared orbit in
phase 4, so the per-agent work has no ordering dependence.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np

from .config import ScenarioConfig, build_convoy
from .cooperation import CoopState, PeerTable, coop_step, decode_packet, encode_packet
from .geometry import EllipseAxes, OrbitCoords, OrbitSpec, Vec2, normalize_angle, orbit_coords
from .guidance import GuidanceGains, angular_rate_command, heading_command
from .orbit_planner import ConvoySnapshot, OrbitPlanner
from .speed_control import SpeedEnvelope, build_envelope, compose_speed, nominal_speed, parametric_rate


def _wrap_heading(psi: float) -> float:
    # (-pi, pi]
    psi = normalize_angle(psi)
    return math.pi if psi <= -math.pi else psi


@dataclass
class AgentState:
    x: float
    y: float
    psi: float
    z: float = 0.0
    z_cmd: float = 0.0
    V_cmd: float = 0.0
    omega_cmd: float = 0.0


def _unicycle_rhs(psi: float, V: float, omega: float) -> Tuple[float, float, float]:
    return V * math.cos(psi), V * math.sin(psi), omega


def unicycle_step(state: AgentState, V: float, omega: float, dt: float,
                  method: str = "rk4") -> AgentState:
    """Advance the planar pose by ``dt`` with ``V`` and ``omega`` held constant."""
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    x, y, psi = state.x, state.y, state.psi
    if method == "euler":
        dx, dy, dpsi = _unicycle_rhs(psi, V, omega)
        x, y, psi = x + dt * dx, y + dt * dy, psi + dt * dpsi
    elif method == "rk4":
        h = 0.5 * dt
        k1 = _unicycle_rhs(psi, V, omega)
        k2 = _unicycle_rhs(psi + h * k1[2], V, omega)
        k3 = _unicycle_rhs(psi + h * k2[2], V, omega)
        k4 = _unicycle_rhs(psi + dt * k3[2], V, omega)
        w = dt / 6.0
        x += w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        y += w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        psi += w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
    else:
        raise ValueError(f"unknown integrator {method!r}")
    return AgentState(x, y, _wrap_heading(psi), state.z, state.z_cmd, V, omega)


def altitude_and_velocity_mapping(state: AgentState, k_z: float) -> Tuple[float, float, float, float]:
    """Velocity-command form ``(V_x, V_y, V_z, omega_z)`` for a multirotor autopilot."""
    return (state.V_cmd * math.cos(state.psi), state.V_cmd * math.sin(state.psi),
            k_z * (state.z_cmd - state.z), state.omega_cmd)


def altitude_step(z: float, z_cmd: float, k_z: float, dt: float, method: str = "rk4") -> float:
    """Integrate ``dz/dt = k_z (z_cmd - z)`` over one tick."""
    e = z_cmd - z
    if method == "euler":
        return z + dt * k_z * e
    # RK4 on a linear ODE collapses to a polynomial in (k_z dt)
    h = k_z * dt
    return z_cmd - e * (1.0 - h + h * h / 2.0 - h ** 3 / 6.0 + h ** 4 / 24.0)


class AgentMetrics(NamedTuple):
    x: float
    y: float
    psi: float
    z: float
    V_cmd: float
    omega_cmd: float
    gamma_A: float
    s_A: float
    D_s: float
    fl_O: bool
    fl_R: bool
    fl_H: bool


@dataclass
class MetricsRecord:
    t: float
    agents: List[AgentMetrics]
    orbit: OrbitSpec
    convoy: List[Vec2]


@dataclass
class Agent:
    index: int
    state: AgentState
    coop: CoopState
    table: PeerTable


def initial_poses(cfg: ScenarioConfig, centroid: Vec2) -> List[Tuple[float, float, float]]:
    init = cfg.agents
    if init.poses is not None:
        return [tuple(p) for p in init.poses]
    rng = random.Random(init.seed)
    w = init.half_width
    return [(centroid[0] + rng.uniform(-w, w), centroid[1] + rng.uniform(-w, w),
             rng.uniform(-math.pi, math.pi)) for _ in range(cfg.N_A)]


@dataclass
class Simulation:
    config: ScenarioConfig
    tick_count: int = field(default=0, init=False)
    records: List[MetricsRecord] = field(default_factory=list, init=False)

    def __post_init__(self):
        cfg = self.config
        self.convoy = build_convoy(cfg)
        self.env: SpeedEnvelope = build_envelope(cfg.V_A_min, cfg.V_A_max, cfg.V_T_max, cfg.delta)
        self.planner = OrbitPlanner(self.env, cfg.omega_max, cfg.alpha, cfg.shape_smoothing,
                                    cfg.use_l1_minor_term)
        self.gains = GuidanceGains(cfg.k_gamma, cfg.k_psi, cfg.omega_max,
                                   curvature_weighted=cfg.guidance == "curvature")
        self.bus: List[bytes] = []
        pts = self.convoy.positions(0.0)
        n = len(pts)
        centroid = (sum(p[0] for p in pts) / n, sum(p[1] for p in pts) / n)
        self.agents: List[Agent] = []
        for i, (x, y, psi) in enumerate(initial_poses(cfg, centroid), start=1):
            if x == centroid[0] and y == centroid[1]:
                # the vector field is undefined at the orbit center
                x += 1e-6
            z0 = cfg.z_mission + cfg.z_separation * (i - 1)
            self.agents.append(Agent(
                i, AgentState(x, y, _wrap_heading(psi), z0, z0),
                CoopState(i, cfg.N_A, cfg.k_s, cfg.gamma_Th, cfg.D_Th),
                PeerTable(cfg.N_A),
            ))

    @property
    def t(self) -> float:
        return self.tick_count * self.config.dt

    def _deliver(self) -> None:
        packets = [decode_packet(frame, self.config.N_A) for frame in self.bus]
        for ag in self.agents:
            for p in packets:
                if p.agent_index != ag.index:
                    ag.table.update(p)
        self.bus = []

    def _command(self, ag: Agent, orbit: OrbitSpec) -> Tuple[OrbitCoords, float]:
        cfg = self.config
        st = ag.state
        axes = orbit.axes
        coords = orbit_coords((st.x, st.y), orbit, cfg.d_c)
        hc = heading_command(coords, axes, cfg.d_c, self.gains)
        omega = angular_rate_command(hc.psi_D, st.psi, orbit.tilt, self.gains)
        out = coop_step(ag.coop, ag.table, coords, axes)
        self.bus.append(encode_packet(out.packet))
        if coords.gamma_A > 0.0:
            s_v = parametric_rate(self.env, axes, coords.gamma_A)
            V_E = nominal_speed(coords.s_A, coords.gamma_A, axes, s_v)
        else:
            V_E = self.env.V_E_min
        V = compose_speed(V_E, out.V_C, st.psi, orbit.center_velocity, self.env)
        st.V_cmd, st.omega_cmd = V, omega
        if ag.coop.fl_H:
            st.z_cmd = cfg.z_mission
        return coords, out.D_s

    def tick(self) -> MetricsRecord:
        cfg = self.config
        t = self.t
        positions = self.convoy.positions(t)
        orbit = self.planner.plan(ConvoySnapshot(positions, self.tick_count, cfg.dt))
        self._deliver()
        logged = []
        for ag in self.agents:
            coords, D_s = self._command(ag, orbit)
            st = ag.state
            logged.append(AgentMetrics(st.x, st.y, st.psi, st.z, st.V_cmd, st.omega_cmd,
                                       coords.gamma_A, coords.s_A, D_s,
                                       ag.coop.fl_O, ag.coop.fl_R, ag.coop.fl_H))
        for ag in self.agents:
            st = ag.state
            new = unicycle_step(st, st.V_cmd, st.omega_cmd, cfg.dt, cfg.integrator)
            new.z = altitude_step(st.z, st.z_cmd, cfg.k_z, cfg.dt, cfg.integrator)
            ag.state = new
        rec = MetricsRecord(t, logged, orbit, positions)
        self.records.append(rec)
        self.tick_count += 1
        return rec

    def run(self, n_ticks: Optional[int] = None,
            callback: Optional[Callable[[MetricsRecord], None]] = None) -> List[MetricsRecord]:
        if n_ticks is None:
            n_ticks = n_ticks_for(self.config.duration, self.config.dt)
        for _ in range(n_ticks):
            rec = self.tick()
            if callback is not None:
                callback(rec)
        return self.records


def n_ticks_for(duration: float, dt: float) -> int:
    return int(round(duration / dt))


def sim_tick(world: Simulation) -> Simulation:
    world.tick()
    return world


class FixedOrbitTrace(NamedTuple):
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    gamma_A: np.ndarray
    s_A: np.ndarray
    psi_O: np.ndarray


def track_fixed_orbit(orbit: OrbitSpec, gains: GuidanceGains, d_c: int, speed: float,
                      pose: Tuple[float, float, float], dt: float, duration: float,
                      method: str = "rk4") -> FixedOrbitTrace:
    """Single constant-speed agent steered onto a stationary orbit.

    Used for guidance-law comparisons where speed control and cooperation
    are switched off.
    """
    n = n_ticks_for(duration, dt) + 1
    out = np.empty((8, n))
    st = AgentState(pose[0], pose[1], _wrap_heading(pose[2]))
    for k in range(n):
        coords = orbit_coords((st.x, st.y), orbit, d_c)
        hc = heading_command(coords, orbit.axes, d_c, gains)
        omega = angular_rate_command(hc.psi_D, st.psi, orbit.tilt, gains)
        out[:, k] = (k * dt, st.x, st.y, st.psi, omega, coords.gamma_A, coords.s_A, hc.psi_O)
        if k + 1 < n:
            st = unicycle_step(st, speed, omega, dt, method)
    return FixedOrbitTrace(*out)


def stationary_orbit(a: float, b: float, center: Vec2 = (0.0, 0.0), tilt: float = 0.0) -> OrbitSpec:
    return OrbitSpec(center, tilt, EllipseAxes(a, b), (0.0, 0.0))
