"""Application configuration management."""

import math

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Runtime settings shared by the planners, the simulator and the CLI."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="NAVSTACK_",
        case_sensitive=False,
    )

    # Logging
    log_level: str = Field(default="INFO", description="Log level")
    log_format: str = Field(default="text", description="Log format (json|text)")

    @field_validator("log_format", mode="after")
    @classmethod
    def check_log_format(cls, v: str) -> str:
        """Only the two sink layouts known to log_config are accepted."""
        v = v.lower()
        if v not in ("json", "text"):
            raise ValueError(f"log_format must be 'json' or 'text', got {v!r}")
        return v

    # Output
    output_dir: str = Field(default="runs", description="Directory for logs and plots")
    default_seed: int = Field(default=0, description="Seed used when none is given")

    # Branch-and-bound / QP
    integrality_tol: float = Field(default=1e-6, description="Distance to {0,1} counted as integral")
    abs_gap: float = Field(default=1e-6, description="Absolute optimality gap")
    rel_gap: float = Field(default=1e-4, description="Relative optimality gap")
    iteration_limit: int = Field(default=10_000, description="Max QP relaxations per MIQP solve")
    qp_tol: float = Field(default=1e-9, description="Scaled KKT residual tolerance of the QP solver")
    qp_max_iter: int = Field(default=200, description="Max interior-point iterations per QP")

    # Global planner
    geometry_tol: float = Field(default=1e-9, description="Coincident-vertex tolerance (m)")
    boundary_max_edge: float | None = Field(
        default=0.25,
        description="Densify arena/obstacle edges to this length before triangulating (m)",
    )

    # Vehicle
    tau_v: float = Field(default=0.2, description="Speed lag time constant (s)")
    tau_omega: float = Field(default=0.3, description="Turn-rate lag time constant (s)")
    v_floor: float = Field(default=0.05, description="Speed floor in the heading law (m/s)")
    plant_v_max: float = Field(default=0.6, description="Speed setpoint saturation (m/s)")
    plant_omega_max: float = Field(default=2 * math.pi, description="Turn-rate setpoint saturation (rad/s)")

    # Simulation
    plant_dt: float = Field(default=0.01, description="Plant integration step (s)")
    control_dt: float = Field(default=0.02, description="Path-following controller period (s)")
    time_limit: float = Field(default=120.0, description="Episode time limit (s)")
    goal_tolerance: float = Field(default=0.15, description="Arrival radius (m)")
    goal_speed: float = Field(default=0.05, description="Arrival speed threshold (m/s)")
    robot_radius: float = Field(default=0.15, description="Robot footprint radius (m)")
    local_map_size: float = Field(default=2.1, description="Local map box width and height (m)")
    max_replans: int = Field(default=25, description="Re-plan budget per episode")


# Global settings instance
settings = Settings()
