"""Closed-form ellipse geometry used by the guidance and coordination layers.

Points on the desired orbit are written as ``(a cos s, b sin s)``; every
other point in the plane sits on a concentric ellipse of level ``gamma``,
i.e. ``(a sqrt(gamma) cos s, b sqrt(gamma) sin s)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Tuple

TAU = 2.0 * math.pi

Vec2 = Tuple[float, float]


class Direction(IntEnum):
    """Traversal direction on the orbit."""

    CW = -1
    CCW = 1


@dataclass(frozen=True)
class EllipseAxes:
    a: float
    b: float

    def __post_init__(self):
        if not (self.b > 0.0 and self.a >= self.b):
            raise ValueError(f"ellipse axes need a >= b > 0, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class OrbitSpec:
    """A snapshot of the (possibly moving) elliptical orbit."""

    center: Vec2
    tilt: float
    axes: EllipseAxes
    center_velocity: Vec2 = (0.0, 0.0)


class OrbitCoords(NamedTuple):
    x_AE: float
    y_AE: float
    theta_A: float
    s_A: float
    gamma_A: float


class Extrema(NamedTuple):
    V_min: float
    V_max: float
    R_min: float
    R_max: float
    kappa_min: float
    kappa_max: float


def normalize_angle(x: float) -> float:
    """Wrap ``x`` into [-pi, pi]."""
    return math.remainder(x, TAU)


def wrap_to_2pi(x: float) -> float:
    """Wrap ``x`` into [0, 2pi)."""
    w = math.fmod(x, TAU)
    if w < 0.0:
        w += TAU
    # tiny negatives round up to exactly TAU
    return 0.0 if w >= TAU else w


def rotate_to_frame(p: Vec2, theta: float) -> Vec2:
    """Express the global vector ``p`` in a frame rotated by ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return (c * p[0] + s * p[1], -s * p[0] + c * p[1])


def rotate_from_frame(p: Vec2, theta: float) -> Vec2:
    """Inverse of :func:`rotate_to_frame`."""
    return rotate_to_frame(p, -theta)


def speed_factor(s: float, axes: EllipseAxes) -> Tuple[float, float]:
    """Return ``G(s)`` and ``dG/ds``.

    ``G(s) = sqrt(a^2 sin^2 s + b^2 cos^2 s)`` converts a parametric rate into
    a linear speed on the unit-level ellipse.
    """
    a, b = axes.a, axes.b
    sn, cs = math.sin(s), math.cos(s)
    G = math.sqrt(a * a * sn * sn + b * b * cs * cs)
    dG = (a * a - b * b) * math.sin(2.0 * s) / (2.0 * G)
    return G, dG


def curvature(s: float, axes: EllipseAxes) -> Tuple[float, float]:
    """Curvature and radius of curvature of the orbit at parameter ``s``."""
    G, _ = speed_factor(s, axes)
    radius = G ** 3 / (axes.a * axes.b)
    return 1.0 / radius, radius


def extrema(axes: EllipseAxes, s_v: float) -> Extrema:
    """Speed / radius / curvature extrema for constant parametric rate ``s_v``.

    Minimum speed, minimum radius and maximum curvature occur at ``s = n*pi``;
    the opposite extremes at ``s = (2n+1)*pi/2``.
    """
    if not s_v > 0.0:
        raise ValueError(f"parametric rate must be positive, got {s_v}")
    a, b = axes.a, axes.b
    return Extrema(
        V_min=b * s_v,
        V_max=a * s_v,
        R_min=b * b / a,
        R_max=a * a / b,
        kappa_min=b / (a * a),
        kappa_max=a / (b * b),
    )


def concentric_point(s: float, gamma: float, axes: EllipseAxes) -> Vec2:
    """Orbit-frame point with parameter ``s`` on the level-``gamma`` ellipse."""
    r = math.sqrt(gamma)
    return (axes.a * r * math.cos(s), axes.b * r * math.sin(s))


def orbit_coords(p_global: Vec2, orbit: OrbitSpec, d_c: int = Direction.CCW) -> OrbitCoords:
    """Re-express a global position in the orbit frame.

    ``s_A`` is returned in [0, 2pi) and already carries the direction sign, so
    increasing ``s_A`` always points along the direction of travel.
    At the exact orbit center ``atan2(0, 0)`` gives ``theta_A = 0``.
    """
    a, b = orbit.axes.a, orbit.axes.b
    x, y = rotate_to_frame(
        (p_global[0] - orbit.center[0], p_global[1] - orbit.center[1]), orbit.tilt
    )
    theta = math.atan2(y, x)
    s = d_c * math.atan2(a * math.sin(theta), b * math.cos(theta))
    gamma = x * x / (a * a) + y * y / (b * b)
    return OrbitCoords(x, y, theta, wrap_to_2pi(s), gamma)
