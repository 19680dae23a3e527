"""Differential-drive (unicycle) kinematics and curb collision."""

from __future__ import annotations

from dataclasses import dataclass

import math

from ..errors import ContractError
from .geometry import TileMap

V_MAX_DEFAULT = 2.0       # m/s
OMEGA_MAX_DEFAULT = 1.5   # rad/s
DT_DEFAULT = 0.1          # s
CURB_MARGIN_DEFAULT = 0.1  # m off-road tolerance before the curb sensor fires


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    r = math.remainder(theta, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    heading: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.heading)):
            raise ContractError("pose components must be finite")


@dataclass(frozen=True)
class Action:
    """Throttle/steer command; both components clamp to [-1, 1]."""

    throttle: float
    steer: float

    def __post_init__(self):
        object.__setattr__(self, "throttle", min(1.0, max(-1.0, float(self.throttle))))
        object.__setattr__(self, "steer", min(1.0, max(-1.0, float(self.steer))))


def step_dynamics(
    pose: RobotPose,
    action: Action,
    dt: float = DT_DEFAULT,
    v_max: float = V_MAX_DEFAULT,
    omega_max: float = OMEGA_MAX_DEFAULT,
) -> RobotPose:
    """Exact constant-twist arc update of the unicycle model.

    Linear speed is v_max * throttle, angular rate omega_max * steer; the
    closed-form arc makes the result independent of how dt is subdivided.
    """
    if dt <= 0:
        raise ContractError(f"dt must be positive, got {dt}")
    v = v_max * action.throttle
    w = omega_max * action.steer
    th = pose.heading
    if abs(w) < 1e-12:
        nx = pose.x + v * math.cos(th) * dt
        ny = pose.y + v * math.sin(th) * dt
        nth = th
    else:
        th2 = th + w * dt
        r = v / w
        nx = pose.x + r * (math.sin(th2) - math.sin(th))
        ny = pose.y - r * (math.cos(th2) - math.cos(th))
        nth = th2
    return RobotPose(nx, ny, wrap_angle(nth))


def curb_collision(tmap: TileMap, pose: RobotPose, margin: float = CURB_MARGIN_DEFAULT) -> bool:
    """True when the robot center sits off-road by more than `margin` meters."""
    return tmap.road_distance(pose.x, pose.y) > margin
