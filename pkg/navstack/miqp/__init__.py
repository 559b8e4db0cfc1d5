"""Mixed-integer QP solving: problem data, convex QP relaxations, branch and bound."""

from .bnb import (
    BnBNode,
    SolveOutcome,
    SolveStatus,
    Tolerances,
    TraceRecord,
    branch,
    enumerate_binaries,
    lower_bound,
    solve,
)
from .problem import MIQProblem, QuadraticProgram, dense_problem
from .qp import QPResult, solve_qp

__all__ = [
    "BnBNode",
    "MIQProblem",
    "QPResult",
    "QuadraticProgram",
    "SolveOutcome",
    "SolveStatus",
    "Tolerances",
    "TraceRecord",
    "branch",
    "dense_problem",
    "enumerate_binaries",
    "lower_bound",
    "solve",
    "solve_qp",
]
