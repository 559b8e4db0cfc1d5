"""Path-following feedback law that tracks MPC motion plans."""

from __future__ import annotations

import math

from pydantic import BaseModel, Field

from navstack.config import settings
from navstack.geometry.sets import Point2, wrap_angle
from navstack.vehicle.plant import ActuatorSetpoint, PlantParams, UnicycleState


class ControllerGains(BaseModel):
    k_t: float = Field(default=1.5, gt=0, description="Tangential position gain (1/s)")
    k_n: float = Field(default=0.6, gt=0, description="Normal position gain (rad·s)")
    k_theta: float = Field(default=1.9, gt=0, description="Heading gain (1/s)")


def path_errors(state: UnicycleState, ref_point: Point2, theta_r: float) -> tuple[float, float]:
    """Position error split into components along and left of the reference heading."""
    ex, ey = ref_point.x - state.x, ref_point.y - state.y
    c, s = math.cos(theta_r), math.sin(theta_r)
    return ex * c + ey * s, -ex * s + ey * c


def control(
    state: UnicycleState,
    ref_point: Point2,
    v_r: float,
    theta_r: float,
    omega_r: float,
    gains: ControllerGains | None = None,
    limits: PlantParams | None = None,
    v_floor: float | None = None,
) -> ActuatorSetpoint:
    """Speed and turn-rate setpoints, saturated to the plant limits."""
    gains = gains or ControllerGains()
    limits = limits or PlantParams()
    v_floor = settings.v_floor if v_floor is None else v_floor

    e_t, e_n = path_errors(state, ref_point, theta_r)
    v_cmd = gains.k_t * e_t * math.cos(theta_r - state.theta) + v_r
    theta_cmd = math.atan(gains.k_n * e_n / max(state.v, v_floor)) + theta_r
    omega_cmd = gains.k_theta * wrap_angle(theta_cmd - state.theta) + omega_r
    return ActuatorSetpoint(v_cmd, omega_cmd).saturate(limits)
