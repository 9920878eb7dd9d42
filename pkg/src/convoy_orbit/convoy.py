"""Scripted ground-convoy paths.

Every model places a lead vehicle on a path as a function of time and lets
the others trail it along the same path; vehicle ``N_T`` (last in the
returned list) leads.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import List, Sequence

from .geometry import Vec2


class ConvoyModel:
    n_vehicles: int

    def positions(self, t: float) -> List[Vec2]:
        raise NotImplementedError

    def max_speed(self) -> float:
        raise NotImplementedError


@dataclass
class StationaryConvoy(ConvoyModel):
    points: Sequence[Vec2]

    def __post_init__(self):
        self.points = [(float(x), float(y)) for x, y in self.points]
        self.n_vehicles = len(self.points)

    def positions(self, t: float) -> List[Vec2]:
        return list(self.points)

    def max_speed(self) -> float:
        return 0.0


@dataclass
class ArcConvoy(ConvoyModel):
    """Vehicles on a circle of ``radius`` with fixed arc spacing.

    ``speed = 0`` gives a stationary convoy laid out along a curve.
    """

    n_vehicles: int
    center: Vec2
    radius: float
    spacing: float
    speed: float = 0.0
    start_angle: float = 0.0

    def __post_init__(self):
        if self.radius <= 0.0 or self.spacing < 0.0 or self.speed < 0.0:
            raise ValueError("arc convoy needs radius > 0, spacing >= 0, speed >= 0")

    def positions(self, t: float) -> List[Vec2]:
        out = []
        lead = self.start_angle + self.speed * t / self.radius
        for i in range(self.n_vehicles):
            ang = lead - (self.n_vehicles - 1 - i) * self.spacing / self.radius
            out.append((self.center[0] + self.radius * math.cos(ang),
                        self.center[1] + self.radius * math.sin(ang)))
        return out

    def max_speed(self) -> float:
        return self.speed


@dataclass
class LissajousConvoy(ConvoyModel):
    """Lissajous path ``(A sin(w1 u + phase), B sin(w2 u))`` with ``u = rate * t``.

    ``rate`` is chosen so that the path speed never exceeds ``V_max``;
    followers repeat the leader's motion ``lag`` seconds later.
    """

    n_vehicles: int
    center: Vec2
    A: float
    B: float
    V_max: float
    lag: float
    w1: float = 1.0
    w2: float = 2.0
    phase: float = 0.0
    t0: float = 0.0
    rate: float = field(init=False)

    def __post_init__(self):
        bound = math.hypot(self.A * self.w1, self.B * self.w2)
        if bound <= 0.0:
            raise ValueError("degenerate Lissajous curve")
        # |velocity| <= rate * bound; equality when both cosines peak together
        self.rate = self.V_max / bound

    def lead_position(self, t: float) -> Vec2:
        u = self.rate * (t + self.t0)
        return (self.center[0] + self.A * math.sin(self.w1 * u + self.phase),
                self.center[1] + self.B * math.sin(self.w2 * u))

    def velocity(self, t: float) -> Vec2:
        u = self.rate * (t + self.t0)
        return (self.rate * self.A * self.w1 * math.cos(self.w1 * u + self.phase),
                self.rate * self.B * self.w2 * math.cos(self.w2 * u))

    def positions(self, t: float) -> List[Vec2]:
        return [self.lead_position(t - (self.n_vehicles - 1 - i) * self.lag)
                for i in range(self.n_vehicles)]

    def max_speed(self) -> float:
        return self.V_max


@dataclass
class WaypointConvoy(ConvoyModel):
    """Piecewise-linear path at constant speed with a stop of ``dwell`` seconds
    at every interior corner.

    Followers trail the leader by ``spacing`` metres of path (converted to a
    time lag at cruise speed). Before its first waypoint a vehicle sits on the
    backwards extension of the first segment; after the last waypoint it stops,
    unless ``loop`` closes the path.
    """

    n_vehicles: int
    waypoints: Sequence[Vec2]
    speed: float
    spacing: float
    dwell: float = 0.0
    loop: bool = False
    _times: List[float] = field(init=False, repr=False)
    _events: List[tuple] = field(init=False, repr=False)

    def __post_init__(self):
        pts = [(float(x), float(y)) for x, y in self.waypoints]
        if len(pts) < 2:
            raise ValueError("waypoint convoy needs at least two waypoints")
        if self.speed <= 0.0:
            raise ValueError("waypoint convoy speed must be > 0")
        if self.n_vehicles > 1 and self.dwell >= self.spacing / self.speed:
            # a follower would catch up with a vehicle stopped at a corner
            raise ValueError("corner dwell must be shorter than the spacing time lag")
        if self.loop and pts[0] != pts[-1]:
            pts.append(pts[0])
        self.waypoints = pts
        # event list: (start time, kind, start point, end point, duration)
        events, t = [], 0.0
        for k in range(len(pts) - 1):
            p, q = pts[k], pts[k + 1]
            length = math.dist(p, q)
            if length == 0.0:
                continue
            if events and self.dwell > 0.0:
                events.append((t, "stop", p, p, self.dwell))
                t += self.dwell
            dur = length / self.speed
            events.append((t, "move", p, q, dur))
            t += dur
        if not events:
            raise ValueError("waypoints are all coincident")
        if self.loop and self.dwell > 0.0:
            events.append((t, "stop", pts[-1], pts[-1], self.dwell))
            t += self.dwell
        self._events = events
        self._times = [e[0] for e in events]
        self.period = t

    def lead_position(self, tau: float) -> Vec2:
        first = self._events[0]
        if tau < 0.0:
            (px, py), (qx, qy) = first[2], first[3]
            f = tau / first[4]
            return (px + f * (qx - px), py + f * (qy - py))
        if tau >= self.period:
            if not self.loop:
                return self._events[-1][3]
            tau = math.fmod(tau, self.period)
        k = bisect.bisect_right(self._times, tau) - 1
        t0, kind, p, q, dur = self._events[k]
        if kind == "stop":
            return p
        f = min(1.0, (tau - t0) / dur)
        return (p[0] + f * (q[0] - p[0]), p[1] + f * (q[1] - p[1]))

    def positions(self, t: float) -> List[Vec2]:
        lag = self.spacing / self.speed
        return [self.lead_position(t - (self.n_vehicles - 1 - i) * lag)
                for i in range(self.n_vehicles)]

    def max_speed(self) -> float:
        return self.speed
