"""MPC configuration (horizon, weights, limits, trigger threshold)."""

from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, Field, ValidationInfo, field_validator, model_validator

from navstack.config import settings


def _diag(*values: float) -> list[list[float]]:
    return np.diag(values).tolist()


class MPCConfig(BaseModel):
    """Mixed-integer MPC parameters; defaults reproduce the reference experiment."""

    N: int = Field(default=15, ge=1, description="Horizon steps")
    dt: float = Field(default=0.5, gt=0, description="Step length (s)")
    Q_k: list[list[float]] = Field(default_factory=lambda: _diag(0.1, 0.1, 0.0, 0.0))
    R_k: list[list[float]] = Field(default_factory=lambda: _diag(10.0, 10.0))
    Q_N: list[list[float]] = Field(default_factory=lambda: _diag(10.0, 10.0, 0.0, 0.0))
    v_max: float = Field(default=0.5, gt=0, description="Speed polytope bound (m/s)")
    v_min: float = Field(default=0.1, gt=0, description="Speed used in the input polytope (m/s)")
    omega_max: float = Field(default=math.pi, gt=0, description="Turn-rate limit (rad/s)")
    slack_weight: float = Field(default=1e6, gt=0, description="Quadratic slack penalty")
    j_max: float = Field(default=1000.0, gt=0, description="Re-plan threshold on the lower bound")
    lookahead: float = Field(default=2.0, gt=0, description="Lookahead arc length (m)")
    terminal_radius: float = Field(default=0.2, gt=0, description="Terminal hexagon circumradius (m)")
    soften_terminal_velocity: bool = Field(
        default=False, description="Soften v_N = 0 instead of imposing it exactly"
    )
    robot_radius: float = Field(default_factory=lambda: settings.robot_radius, ge=0)
    abs_gap: float = Field(default_factory=lambda: settings.abs_gap, ge=0)
    rel_gap: float = Field(default_factory=lambda: settings.rel_gap, ge=0)
    iteration_limit: int = Field(default=2000, ge=1)

    @field_validator("Q_k", "R_k", "Q_N")
    @classmethod
    def check_psd(cls, v: list[list[float]], info: ValidationInfo) -> list[list[float]]:
        m = np.asarray(v, dtype=float)
        size = 2 if info.field_name == "R_k" else 4
        if m.shape != (size, size):
            raise ValueError(f"{info.field_name} must be {size}x{size}, got {m.shape}")
        if not np.allclose(m, m.T):
            raise ValueError(f"{info.field_name} must be symmetric")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError(f"{info.field_name} must be positive semidefinite")
        return m.tolist()

    @model_validator(mode="after")
    def check_speeds(self) -> MPCConfig:
        if self.v_min >= self.v_max:
            raise ValueError(f"v_min ({self.v_min}) must be below v_max ({self.v_max})")
        return self

    @property
    def bloat_margin(self) -> float:
        """Robot radius plus half the distance covered between samples."""
        return self.robot_radius + self.v_max * self.dt / 2.0

    @property
    def input_bound(self) -> float:
        return self.v_min * self.omega_max

    def weights(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.asarray(self.Q_k), np.asarray(self.R_k), np.asarray(self.Q_N)
