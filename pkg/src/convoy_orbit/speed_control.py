"""Linear speed command: nominal equi-parametric profile, cooperative
correction and orbit-motion compensation."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .geometry import EllipseAxes


class InfeasibleScenarioError(ValueError):
    """Speed bounds leave the agents no usable advantage over the convoy."""


@dataclass(frozen=True)
class SpeedEnvelope:
    V_A_min: float
    V_A_max: float
    V_T_max: float
    delta: float
    V_R_min: float
    V_R_max: float
    V_E_min: float
    V_E_max: float

    @property
    def ratio(self) -> float:
        """Smallest admissible minor/major axis ratio."""
        return self.V_E_min / self.V_E_max


def check_speed_assumption(V_A_min: float, V_A_max: float, V_T_max: float) -> None:
    if not (0.0 <= V_T_max < V_A_min < V_A_max - 2.0 * V_T_max):
        raise InfeasibleScenarioError(
            "speed assumption 0 <= V_T_max < V_A_min < V_A_max - 2*V_T_max violated: "
            f"V_T_max={V_T_max}, V_A_min={V_A_min}, V_A_max={V_A_max}"
        )


def build_envelope(V_A_min: float, V_A_max: float, V_T_max: float, delta: float) -> SpeedEnvelope:
    check_speed_assumption(V_A_min, V_A_max, V_T_max)
    if not 0.0 < delta <= 1.0:
        raise InfeasibleScenarioError(f"delta must lie in (0, 1], got {delta}")
    V_R_max = V_A_max - V_T_max
    V_R_min = V_A_min + V_T_max
    V_E_min = (1.0 - delta) * V_R_max / 2.0 + (1.0 + delta) * V_R_min / 2.0
    V_E_max = (1.0 + delta) * V_R_max / 2.0 + (1.0 - delta) * V_R_min / 2.0
    return SpeedEnvelope(V_A_min, V_A_max, V_T_max, delta, V_R_min, V_R_max, V_E_min, V_E_max)


def parametric_rate(env: SpeedEnvelope, axes: EllipseAxes, gamma_A: float) -> float:
    """Constant parametric rate whose speed extremes straddle the envelope midpoint."""
    if not gamma_A > 0.0:
        raise ValueError(f"gamma_A must be > 0, got {gamma_A}")
    # small slack: planner outputs sit exactly on the ratio bound
    if axes.b / axes.a < env.ratio * (1.0 - 1e-12):
        raise ValueError(
            f"axes ratio b/a={axes.b / axes.a:.6g} below V_E_min/V_E_max={env.ratio:.6g}"
        )
    return (env.V_E_min + env.V_E_max) / ((axes.a + axes.b) * math.sqrt(gamma_A))


def scaled_speed_factor(s_A: float, gamma_A: float, axes: EllipseAxes) -> float:
    """``sqrt(gamma (a^2 sin^2 s + b^2 cos^2 s))``: linear speed per unit parametric rate."""
    sn, cs = math.sin(s_A), math.cos(s_A)
    return math.sqrt(gamma_A * (axes.a ** 2 * sn * sn + axes.b ** 2 * cs * cs))


def nominal_speed(s_A: float, gamma_A: float, axes: EllipseAxes, s_v: float) -> float:
    return scaled_speed_factor(s_A, gamma_A, axes) * s_v


def compose_speed(V_E: float, V_C: float, psi_A: float,
                  center_velocity: Tuple[float, float], env: SpeedEnvelope) -> float:
    """Add the orbit-center velocity to the orbit-frame speed and saturate.

    Only the magnitude of the compensated vector is commanded, since a
    unicycle cannot realise the lateral component. A negative orbit-frame
    speed is floored at zero: taking the magnitude would otherwise turn a
    large slow-down request into a speed-up.
    """
    v = max(0.0, V_E + V_C)
    vx = v * math.cos(psi_A) + center_velocity[0]
    vy = v * math.sin(psi_A) + center_velocity[1]
    return max(env.V_A_min, min(env.V_A_max, math.hypot(vx, vy)))
