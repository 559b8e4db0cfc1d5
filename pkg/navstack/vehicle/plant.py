"""Unicycle plant with first-order speed and turn-rate lags, integrated with RK4."""

from __future__ import annotations

import math
from dataclasses import dataclass

from pydantic import BaseModel, Field

from navstack.config import settings
from navstack.geometry.sets import Point2, wrap_angle

MAX_PLANT_DT = 0.02


class PlantParams(BaseModel):
    """Actuator time constants and setpoint limits."""

    tau_v: float = Field(default_factory=lambda: settings.tau_v, gt=0, description="Speed lag (s)")
    tau_omega: float = Field(
        default_factory=lambda: settings.tau_omega, gt=0, description="Turn-rate lag (s)"
    )
    v_max: float = Field(default_factory=lambda: settings.plant_v_max, gt=0)
    omega_max: float = Field(default_factory=lambda: settings.plant_omega_max, gt=0)


@dataclass(frozen=True)
class UnicycleState:
    x: float
    y: float
    theta: float = 0.0
    v: float = 0.0
    omega: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(a) for a in (self.x, self.y, self.theta, self.v, self.omega)):
            raise ValueError("UnicycleState entries must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)

    def velocity(self) -> tuple[float, float]:
        return self.v * math.cos(self.theta), self.v * math.sin(self.theta)


@dataclass(frozen=True)
class ActuatorSetpoint:
    v_cmd: float
    omega_cmd: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.v_cmd) and math.isfinite(self.omega_cmd)):
            raise ValueError("ActuatorSetpoint entries must be finite")

    def saturate(self, params: PlantParams) -> ActuatorSetpoint:
        return ActuatorSetpoint(
            v_cmd=min(max(self.v_cmd, 0.0), params.v_max),
            omega_cmd=min(max(self.omega_cmd, -params.omega_max), params.omega_max),
        )


def _rates(
    s: tuple[float, float, float, float, float], sp: ActuatorSetpoint, tau_v: float, tau_w: float
) -> tuple[float, float, float, float, float]:
    _, _, theta, v, omega = s
    return (
        v * math.cos(theta),
        v * math.sin(theta),
        omega,
        (sp.v_cmd - v) / tau_v,
        (sp.omega_cmd - omega) / tau_w,
    )


def step(
    state: UnicycleState,
    setpoint: ActuatorSetpoint,
    dt: float,
    tau_v: float | None = None,
    tau_omega: float | None = None,
) -> UnicycleState:
    """Advance the plant by ``dt`` seconds with one classical Runge-Kutta step."""
    if not 0 < dt <= MAX_PLANT_DT:
        raise ValueError(f"plant step must be in (0, {MAX_PLANT_DT}] s, got {dt}")
    tau_v = settings.tau_v if tau_v is None else tau_v
    tau_w = settings.tau_omega if tau_omega is None else tau_omega

    s0 = (state.x, state.y, state.theta, state.v, state.omega)

    def shifted(base, k, h):
        return tuple(b + h * d for b, d in zip(base, k))

    k1 = _rates(s0, setpoint, tau_v, tau_w)
    k2 = _rates(shifted(s0, k1, dt / 2), setpoint, tau_v, tau_w)
    k3 = _rates(shifted(s0, k2, dt / 2), setpoint, tau_v, tau_w)
    k4 = _rates(shifted(s0, k3, dt), setpoint, tau_v, tau_w)
    x, y, theta, v, omega = (
        s + dt / 6.0 * (a + 2 * b + 2 * c + d) for s, a, b, c, d in zip(s0, k1, k2, k3, k4)
    )
    return UnicycleState(x=x, y=y, theta=theta, v=v, omega=omega)
