"""Best-first branch and bound over convex QP relaxations.

The running lower bound ``j⁻`` is the smaller of the incumbent objective and
the lowest parent bound still in the open set. It is what callers compare
against ``j_max`` to stop early with :attr:`SolveStatus.BOUND_EXCEEDED`.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Callable, Iterable, Mapping

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from navstack import metrics
from navstack.config import settings
from navstack.errors import BranchingError
from navstack.miqp.problem import MIQProblem
from navstack.miqp.qp import solve_qp

RoundingHeuristic = Callable[[np.ndarray], Mapping[int, int] | None]

# Constraint violation tolerated when an unconverged solve yields an integral point.
_PRIMAL_TOL = 1e-6


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE_CERTIFIED = "InfeasibleCertified"
    BOUND_EXCEEDED = "BoundExceeded"
    ITERATION_LIMIT = "IterationLimit"


class Tolerances(BaseModel):
    """Integrality and optimality-gap tolerances."""

    integrality: float = Field(default_factory=lambda: settings.integrality_tol, gt=0, lt=0.5)
    abs_gap: float = Field(default_factory=lambda: settings.abs_gap, ge=0)
    rel_gap: float = Field(default_factory=lambda: settings.rel_gap, ge=0)

    def gap_closed(self, j_plus: float, j_minus: float) -> bool:
        if not math.isfinite(j_plus):
            return False
        return j_plus - j_minus <= max(self.abs_gap, self.rel_gap * abs(j_plus))


class TraceRecord(BaseModel):
    """One line of the per-iteration solver trace."""

    model_config = ConfigDict(ser_json_inf_nan="constants")

    iteration: int
    j_minus: float
    j_plus: float
    open_nodes: int


@dataclass(frozen=True)
class BnBNode:
    """A subproblem: the binaries fixed so far and the bound inherited from its parent."""

    fixings: Mapping[int, int] = field(default_factory=dict)
    parent_bound: float = -math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "fixings", MappingProxyType(dict(self.fixings)))

    @property
    def depth(self) -> int:
        return len(self.fixings)


@dataclass
class SolveOutcome:
    status: SolveStatus
    z_plus: np.ndarray | None
    j_plus: float
    j_minus: float
    iterations: int
    heuristic_solves: int = 0
    trace: list[TraceRecord] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return self.j_plus - self.j_minus


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------


def most_fractional(
    z: np.ndarray, binaries: Iterable[int], integrality_tol: float
) -> int | None:
    """Binary index whose value is closest to 0.5 (lowest index on ties), or None if integral."""
    best, best_dist = None, math.inf
    for i in sorted(binaries):
        frac = min(z[i], 1.0 - z[i])
        if frac <= integrality_tol:
            continue
        dist = abs(z[i] - 0.5)
        if dist < best_dist:
            best, best_dist = i, dist
    return best


def branch(
    node: BnBNode,
    z_relaxed: np.ndarray,
    binaries: Iterable[int],
    bound: float,
    integrality_tol: float | None = None,
) -> tuple[BnBNode, BnBNode]:
    """Split ``node`` on its most fractional binary; children carry ``bound``."""
    tol = settings.integrality_tol if integrality_tol is None else integrality_tol
    k = most_fractional(np.asarray(z_relaxed, dtype=float), binaries, tol)
    if k is None:
        raise BranchingError("relaxation is integral; nothing to branch on")
    child_bound = max(bound, node.parent_bound)
    down = BnBNode({**node.fixings, k: 0}, child_bound)
    up = BnBNode({**node.fixings, k: 1}, child_bound)
    return down, up


def lower_bound(open_bounds: Iterable[float], j_plus: float) -> float:
    return min(min(open_bounds, default=math.inf), j_plus)


def _integral(z: np.ndarray, binaries: tuple[int, ...]) -> np.ndarray:
    out = z.copy()
    idx = list(binaries)
    out[idx] = np.round(out[idx])
    return out


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


def solve(
    problem: MIQProblem,
    j_max: float = math.inf,
    tolerances: Tolerances | None = None,
    iteration_limit: int | None = None,
    rounding: RoundingHeuristic | None = None,
) -> SolveOutcome:
    """Branch and bound with early exit once the lower bound passes ``j_max``.

    ``iterations`` counts relaxation QPs only. When ``rounding`` is given it maps
    a fractional relaxation to a full binary assignment that is solved as a
    separate QP (counted in ``heuristic_solves``); each assignment is tried once.
    """
    tol = tolerances or Tolerances()
    limit = settings.iteration_limit if iteration_limit is None else iteration_limit
    problem.check_convex()

    counter = itertools.count()
    open_set: list[tuple[float, int, BnBNode]] = [(-math.inf, next(counter), BnBNode())]
    j_plus, z_plus = math.inf, None
    iterations = heuristic_solves = 0
    tried: set[tuple[tuple[int, int], ...]] = set()
    trace: list[TraceRecord] = []

    def offer(j: float, z: np.ndarray, floor: float) -> None:
        nonlocal j_plus, z_plus
        # Never let numerical noise push the incumbent under the proven bound.
        j = max(j, floor)
        if j < j_plus:
            j_plus, z_plus = j, _integral(z, problem.binaries)
            logger.debug("[bnb] new incumbent j+={:.6g}", j_plus)

    while True:
        j_minus = lower_bound((b for b, _, _ in open_set), j_plus)
        trace.append(
            TraceRecord(iteration=iterations, j_minus=j_minus, j_plus=j_plus, open_nodes=len(open_set))
        )
        logger.debug(
            "[bnb] it={} j-={:.6g} j+={:.6g} open={}", iterations, j_minus, j_plus, len(open_set)
        )

        if not open_set and z_plus is None:
            status = SolveStatus.INFEASIBLE_CERTIFIED
            break
        if j_minus > j_max:
            status = SolveStatus.BOUND_EXCEEDED
            break
        if not open_set or tol.gap_closed(j_plus, j_minus):
            status = SolveStatus.OPTIMAL
            break
        if iterations >= limit:
            status = SolveStatus.ITERATION_LIMIT
            break

        bound, _, node = heapq.heappop(open_set)
        if bound > j_plus:
            continue

        restriction = problem.restrict(node.fixings)
        result = solve_qp(restriction.qp, check_convex=False)
        iterations += 1
        if not result.feasible:
            continue
        if result.converged:
            j_r = max(result.j, node.parent_bound)
        else:
            # An inaccurate relaxation proves nothing beyond the inherited bound.
            j_r = node.parent_bound
        if j_r > j_plus:
            continue

        z = restriction.lift(result.z)
        k = most_fractional(z, problem.binaries, tol.integrality)
        if k is None:
            if result.converged or restriction.qp.primal_violation(result.z) <= _PRIMAL_TOL:
                offer(result.j, z, j_minus)
            else:
                logger.warning("[bnb] dropped inaccurate integral node {}", dict(node.fixings))
            continue

        if rounding is not None:
            assignment = rounding(z)
            if assignment is not None:
                key = tuple(sorted((int(i), int(v)) for i, v in assignment.items()))
                if key not in tried:
                    tried.add(key)
                    guess = problem.restrict(dict(key))
                    heuristic = solve_qp(guess.qp, check_convex=False)
                    heuristic_solves += 1
                    if heuristic.feasible and (
                        heuristic.converged
                        or guess.qp.primal_violation(heuristic.z) <= _PRIMAL_TOL
                    ):
                        offer(heuristic.j, guess.lift(heuristic.z), j_minus)

        for child in branch(node, z, problem.binaries, j_r, tol.integrality):
            heapq.heappush(open_set, (child.parent_bound, next(counter), child))

    if status is SolveStatus.INFEASIBLE_CERTIFIED:
        j_minus = math.inf
    metrics.bnb_solves.labels(status=status.value).inc()
    logger.info(
        "[bnb] {} after {} relaxations (+{} heuristic): j-={:.6g} j+={:.6g}",
        status.value,
        iterations,
        heuristic_solves,
        j_minus,
        j_plus,
    )
    return SolveOutcome(
        status=status,
        z_plus=z_plus,
        j_plus=j_plus,
        j_minus=j_minus,
        iterations=iterations,
        heuristic_solves=heuristic_solves,
        trace=trace,
    )


def enumerate_binaries(problem: MIQProblem) -> tuple[float, np.ndarray | None]:
    """Brute-force optimum over all 2^|B| assignments (certificate checks, small problems)."""
    best_j, best_z = math.inf, None
    for values in itertools.product((0, 1), repeat=len(problem.binaries)):
        restriction = problem.restrict(dict(zip(problem.binaries, values)))
        result = solve_qp(restriction.qp, check_convex=False)
        if result.feasible and result.j < best_j:
            best_j, best_z = result.j, restriction.lift(result.z)
    return best_j, best_z
