"""Mixed-integer model predictive planning on double-integrator flat outputs."""

from .config import MPCConfig
from .planner import (
    MotionPlan,
    PlanningStalled,
    PlanRecord,
    PlanResult,
    ReplanRequested,
    SolverStats,
    cell_rounding,
    plan,
)
from .problem import FlatState, TerminalSpec, VariableLayout, build_problem, dynamics, soften
from .reference import (
    PlanReference,
    ReferenceSample,
    flat_to_unicycle,
    lookahead_reference,
    route_progress,
)

__all__ = [
    "FlatState",
    "MPCConfig",
    "MotionPlan",
    "PlanRecord",
    "PlanReference",
    "PlanResult",
    "PlanningStalled",
    "ReferenceSample",
    "ReplanRequested",
    "SolverStats",
    "TerminalSpec",
    "VariableLayout",
    "build_problem",
    "cell_rounding",
    "dynamics",
    "flat_to_unicycle",
    "lookahead_reference",
    "plan",
    "route_progress",
    "soften",
]
