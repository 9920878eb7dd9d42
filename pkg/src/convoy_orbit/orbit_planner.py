"""Per-tick feasible orbit around the convoy.

The orbit is centered on the convoy centroid and tilted along the line from
the last vehicle (index 1) to the lead vehicle (index N_T). Its axes are the
minimum-area ellipse around the convoy's bounding box, enlarged as needed so
that the agents' turn-rate and speed-profile constraints hold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from .geometry import EllipseAxes, OrbitSpec, Vec2, normalize_angle, rotate_to_frame
from .speed_control import SpeedEnvelope

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ConvoySnapshot:
    positions: Sequence[Vec2]
    tick: int = 0
    dt: float = 0.02

    def __post_init__(self):
        if len(self.positions) < 2:
            raise ValueError("convoy needs at least two vehicles")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be > 0, got {self.dt}")


@dataclass(frozen=True)
class BoundingBox:
    l1: float
    l2: float


def _wrap_tilt(theta: float) -> float:
    # (-pi, pi]
    return math.pi if theta <= -math.pi else theta


def centroid_and_tilt(snapshot: ConvoySnapshot, prev_tilt: float = 0.0) -> Tuple[Vec2, float]:
    """Convoy centroid and orbit tilt.

    When the first and last vehicles coincide the tilt is undefined and
    ``prev_tilt`` is returned instead.
    """
    pts = snapshot.positions
    n = len(pts)
    cx = sum(p[0] for p in pts) / n
    cy = sum(p[1] for p in pts) / n
    dx = pts[-1][0] - pts[0][0]
    dy = pts[-1][1] - pts[0][1]
    if dx == 0.0 and dy == 0.0:
        return (cx, cy), prev_tilt
    return (cx, cy), _wrap_tilt(math.atan2(dy, dx))


def bounding_box(snapshot: ConvoySnapshot, centroid: Vec2, theta_E: float) -> BoundingBox:
    """Box aligned with the tilt and centered on the centroid that holds every vehicle."""
    x_min = x_max = d_max = 0.0
    for px, py in snapshot.positions:
        x_r, y_r = rotate_to_frame((px - centroid[0], py - centroid[1]), theta_E)
        if d_max <= abs(y_r):
            d_max = abs(y_r)
        if x_min >= x_r:
            x_min = x_r
        if x_max <= x_r:
            x_max = x_r
    p_max = max(x_max, abs(x_min))
    return BoundingBox(2.0 * p_max, 2.0 * d_max)


def select_axes(box: BoundingBox, env: SpeedEnvelope, omega_max: float, V_A_max: float,
                use_l1_minor_term: bool = False) -> EllipseAxes:
    """Smallest-area axes around ``box`` that the agents can actually fly.

    The minor axis is bounded below by the breadth term ``l2/sqrt(2)``;
    ``use_l1_minor_term=True`` uses ``l1/sqrt(2)`` instead, which forces a
    near-circular orbit around elongated convoys.
    """
    r_turn = V_A_max / omega_max
    a = max(box.l1 / SQRT2, box.l2 / SQRT2, r_turn)
    b_box = (box.l1 if use_l1_minor_term else box.l2) / SQRT2
    b = max(b_box, a * env.ratio, math.sqrt(a * r_turn))
    # guards the a >= b invariant against round-off in sqrt(a * a)
    return EllipseAxes(a, min(a, b))


@dataclass
class VelocityFilter:
    """Exponential smoothing of the centroid followed by a finite difference."""

    alpha: float = 0.2
    smoothed: Optional[Vec2] = None
    previous: Optional[Vec2] = None

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")


def estimate_center_velocity(filt: VelocityFilter, centroid: Vec2, dt: float,
                             V_T_max: float) -> Vec2:
    """Advance ``filt`` by one tick and return the clamped centroid velocity."""
    if not dt > 0.0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if filt.smoothed is None:
        filt.smoothed = filt.previous = (centroid[0], centroid[1])
        return (0.0, 0.0)
    al = filt.alpha
    prev = filt.smoothed
    cur = (al * centroid[0] + (1.0 - al) * prev[0], al * centroid[1] + (1.0 - al) * prev[1])
    filt.previous, filt.smoothed = prev, cur
    vx, vy = (cur[0] - prev[0]) / dt, (cur[1] - prev[1]) / dt
    speed = math.hypot(vx, vy)
    if speed > V_T_max:
        if V_T_max <= 0.0:
            return (0.0, 0.0)
        k = V_T_max / speed
        vx, vy = vx * k, vy * k
    return (vx, vy)


@dataclass
class OrbitPlanner:
    """Stateful wrapper running the full orbit computation once per tick.

    ``shape_smoothing`` in (0, 1] low-passes axes and tilt between ticks;
    1.0 (the default) passes the raw per-tick values through.
    """

    env: SpeedEnvelope
    omega_max: float
    alpha: float = 0.2
    shape_smoothing: float = 1.0
    use_l1_minor_term: bool = False
    filter: VelocityFilter = field(init=False)
    last: Optional[OrbitSpec] = field(default=None, init=False)

    def __post_init__(self):
        self.filter = VelocityFilter(self.alpha)
        if not 0.0 < self.shape_smoothing <= 1.0:
            raise ValueError(f"shape_smoothing must lie in (0, 1], got {self.shape_smoothing}")

    def plan(self, snapshot: ConvoySnapshot) -> OrbitSpec:
        prev_tilt = self.last.tilt if self.last is not None else 0.0
        center, tilt = centroid_and_tilt(snapshot, prev_tilt)
        box = bounding_box(snapshot, center, tilt)
        axes = select_axes(box, self.env, self.omega_max, self.env.V_A_max,
                           self.use_l1_minor_term)
        if self.last is not None and self.shape_smoothing < 1.0:
            axes, tilt = self._smooth(axes, tilt)
        vel = estimate_center_velocity(self.filter, center, snapshot.dt, self.env.V_T_max)
        self.last = OrbitSpec(center, tilt, axes, vel)
        return self.last

    def _smooth(self, axes: EllipseAxes, tilt: float) -> Tuple[EllipseAxes, float]:
        k = self.shape_smoothing
        old = self.last
        a = old.axes.a + k * (axes.a - old.axes.a)
        b = old.axes.b + k * (axes.b - old.axes.b)
        r_turn = self.env.V_A_max / self.omega_max
        b = min(a, max(b, a * self.env.ratio, math.sqrt(a * r_turn)))
        tilt = _wrap_tilt(normalize_angle(old.tilt + k * normalize_angle(tilt - old.tilt)))
        return EllipseAxes(a, b), tilt
