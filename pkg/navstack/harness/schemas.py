"""Pydantic schemas for scenario files and episode log records.

Scenario files are JSON with units spelled out in field names. Episode logs
are JSON lines; every line carries a ``kind`` discriminator.
"""

from __future__ import annotations

from enum import Enum
from typing import Annotated, Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, TypeAdapter, ValidationInfo, field_validator


class Outcome(str, Enum):
    GOAL_REACHED = "GoalReached"
    STUCK = "Stuck"
    TIMEOUT = "Timeout"


# ---------------------------------------------------------------------------
# Scenario file
# ---------------------------------------------------------------------------


class PolygonModel(BaseModel):
    """Convex polygon given by its vertices."""

    vertices_m: list[tuple[float, float]] = Field(..., min_length=3)


class PoseModel(BaseModel):
    x_m: float
    y_m: float
    theta_rad: float = 0.0


class PositionModel(BaseModel):
    x_m: float
    y_m: float


class ArenaModel(BaseModel):
    xmin_m: float
    ymin_m: float
    xmax_m: float
    ymax_m: float

    @field_validator("xmax_m", "ymax_m")
    @classmethod
    def check_extent(cls, v: float, info: ValidationInfo) -> float:
        low = info.data.get("xmin_m" if info.field_name == "xmax_m" else "ymin_m")
        if low is not None and v <= low:
            raise ValueError(f"{info.field_name} must exceed its lower bound")
        return v


class ScenarioFile(BaseModel):
    version: Literal[1] = 1
    seed: int
    arena: ArenaModel
    mapped_obstacles: list[PolygonModel] = Field(default_factory=list)
    unmapped_obstacles: list[PolygonModel] = Field(default_factory=list)
    start: PoseModel
    goal: PositionModel
    overrides: dict[str, dict[str, Any]] = Field(
        default_factory=dict, description="Per-section overrides: mpc, gains, plant, episode"
    )


# ---------------------------------------------------------------------------
# Episode log records
# ---------------------------------------------------------------------------


class _Record(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    t: float = Field(..., description="Simulation time (s)")


class TelemetryRecord(_Record):
    kind: Literal["telemetry"] = "telemetry"
    x: float
    y: float
    theta: float
    v: float
    omega: float
    clearance: float = Field(..., description="Distance to the nearest obstacle (m)")


class PlanEvent(_Record):
    kind: Literal["plan"] = "plan"
    status: str
    iterations: int
    heuristic_solves: int
    j_minus: float
    j_plus: float
    cells: int
    target: tuple[float, float]
    max_slack: float = 0.0
    accepted: bool = True
    wall_seconds: float = 0.0


class ReplanEvent(_Record):
    kind: Literal["replan"] = "replan"
    j_minus: float
    iterations: int
    removed_chains: list[int]
    backtrack_node: int | None
    wall_seconds: float


class RouteVersion(_Record):
    kind: Literal["route"] = "route"
    version: int
    nodes: list[int]
    chains: list[int]
    cost: float
    waypoints: list[tuple[float, float]]


class OutcomeRecord(_Record):
    kind: Literal["outcome"] = "outcome"
    outcome: Outcome
    reason: str = ""


LogRecord = Annotated[
    Union[TelemetryRecord, PlanEvent, ReplanEvent, RouteVersion, OutcomeRecord],
    Field(discriminator="kind"),
]
record_adapter: TypeAdapter[LogRecord] = TypeAdapter(LogRecord)
