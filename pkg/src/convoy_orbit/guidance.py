"""Vector-field heading guidance onto the elliptical orbit."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .geometry import EllipseAxes, OrbitCoords, curvature, normalize_angle


@dataclass(frozen=True)
class GuidanceGains:
    """Gains for the heading loop.

    ``curvature_weighted=False`` drops the curvature factor from the offset
    term, giving the older constant-gain vector field.
    """

    k_gamma: float
    k_psi: float
    omega_max: float
    curvature_weighted: bool = True

    def __post_init__(self):
        for name in ("k_gamma", "k_psi", "omega_max"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")


class HeadingCommand(NamedTuple):
    psi_T: float
    psi_O: float
    psi_D: float


def offset_heading(s_A: float, gamma_A: float, axes: EllipseAxes, d_c: int,
                   gains: GuidanceGains) -> float:
    gain = gains.k_gamma
    if gains.curvature_weighted:
        gain *= curvature(s_A, axes)[0]
    return d_c * math.atan(gain * (gamma_A - 1.0))


def heading_command(coords: OrbitCoords, axes: EllipseAxes, d_c: int,
                    gains: GuidanceGains) -> HeadingCommand:
    """Desired heading in the orbit frame: local tangent plus convergence offset.

    Headings are not wrapped here; only the tracking error is wrapped, in
    :func:`angular_rate_command`.
    """
    a2, b2 = axes.a * axes.a, axes.b * axes.b
    psi_T = math.atan2(d_c * b2 * coords.x_AE, -d_c * a2 * coords.y_AE)
    psi_O = offset_heading(coords.s_A, coords.gamma_A, axes, d_c, gains)
    return HeadingCommand(psi_T, psi_O, psi_T + psi_O)


def angular_rate_command(psi_D: float, psi_A: float, orbit_tilt: float,
                         gains: GuidanceGains) -> float:
    """Saturated proportional turn-rate command tracking ``psi_D``.

    ``psi_A`` is the global heading; it is compared with ``psi_D`` after
    shifting into the orbit frame.
    """
    err = normalize_angle(psi_D - (psi_A - orbit_tilt))
    omega = gains.k_psi * err
    return max(-gains.omega_max, min(gains.omega_max, omega))
