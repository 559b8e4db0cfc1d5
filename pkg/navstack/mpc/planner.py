"""One MPC solve: terminal reference, softened MIQP, branch and bound, re-plan trigger."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict

from navstack.geometry.partition import ConvexPartition
from navstack.geometry.sets import HPolytope, Point2, regular_hexagon
from navstack.medial_axis.route import Route
from navstack.miqp.bnb import SolveOutcome, SolveStatus, Tolerances, solve
from navstack.mpc.config import MPCConfig
from navstack.mpc.problem import (
    FlatState,
    TerminalSpec,
    VariableLayout,
    build_problem,
    dynamics,
    soften,
)
from navstack.mpc.reference import PlanReference, flat_to_unicycle, lookahead_reference


class SolverStats(BaseModel):
    model_config = ConfigDict(ser_json_inf_nan="constants")

    status: SolveStatus
    iterations: int
    heuristic_solves: int
    j_minus: float
    j_plus: float
    cells: int
    seconds: float


class PlanRecord(BaseModel):
    """Per-step plan export row."""

    t: float
    x: float
    y: float
    vx: float
    vy: float
    v_r: float
    theta_r: float
    omega_r: float


@dataclass(frozen=True, eq=False)
class MotionPlan:
    states: np.ndarray
    inputs: np.ndarray
    dt: float
    v_r: np.ndarray
    theta_r: np.ndarray
    omega_r: np.ndarray
    j: float
    stats: SolverStats
    terminal: TerminalSpec
    max_slack: float = 0.0

    @classmethod
    def from_solution(
        cls,
        z: np.ndarray,
        layout: VariableLayout,
        x0: FlatState,
        config: MPCConfig,
        heading: float,
        j: float,
        stats: SolverStats,
        terminal: TerminalSpec,
    ) -> MotionPlan:
        """Roll the solver's inputs out from ``x0`` so the states obey the dynamics exactly."""
        A, B = dynamics(config.dt)
        inputs = layout.inputs(z).copy()
        states = np.empty((config.N + 1, 4))
        states[0] = x0.as_array()
        for k in range(config.N):
            states[k + 1] = A @ states[k] + B @ inputs[k]
        v_r, theta_r, omega_r = flat_to_unicycle(states, inputs, initial_heading=heading)
        slacks = np.asarray(z[layout.n_base :])
        return cls(
            states=states,
            inputs=inputs,
            dt=config.dt,
            v_r=v_r,
            theta_r=theta_r,
            omega_r=omega_r,
            j=j,
            stats=stats,
            terminal=terminal,
            max_slack=float(slacks.max()) if slacks.size else 0.0,
        )

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def final_state(self) -> FlatState:
        return FlatState.from_array(self.states[-1])

    def reference(self, t0: float = 0.0) -> PlanReference:
        return PlanReference(
            t0=t0,
            dt=self.dt,
            positions=self.positions.copy(),
            v_r=self.v_r,
            theta_r=self.theta_r,
            omega_r=self.omega_r,
        )

    def records(self, t0: float = 0.0) -> list[PlanRecord]:
        return [
            PlanRecord(
                t=t0 + k * self.dt,
                x=float(s[0]),
                y=float(s[1]),
                vx=float(s[2]),
                vy=float(s[3]),
                v_r=float(self.v_r[k]),
                theta_r=float(self.theta_r[k]),
                omega_r=float(self.omega_r[k]),
            )
            for k, s in enumerate(self.states)
        ]


@dataclass(frozen=True)
class ReplanRequested:
    """The solver proved every plan costs more than ``j_max``."""

    j_minus: float
    iterations: int
    stats: SolverStats | None = None


@dataclass(frozen=True)
class PlanningStalled:
    """Iteration limit reached; ``incumbent`` is set when a plan under ``j_max`` was found."""

    incumbent: MotionPlan | None
    j_minus: float
    iterations: int
    stats: SolverStats | None = None


PlanResult = MotionPlan | ReplanRequested | PlanningStalled


def _closest_cell(partition: ConvexPartition, p: np.ndarray) -> int:
    c = partition.locate(p, tol=1e-9)
    if c is not None:
        return c
    violation = [
        float(np.max(unit.normals @ p - unit.offsets))
        for unit in (cell.normalized() for cell in partition.cells)
    ]
    return int(np.argmin(violation))


def cell_rounding(layout: VariableLayout, partition: ConvexPartition):
    """Rounding heuristic: select at each step the cell containing the relaxed position."""

    def round_to_cells(z: np.ndarray) -> Mapping[int, int]:
        positions = layout.states(z)[:, :2]
        assignment: dict[int, int] = {}
        for k in range(1, layout.N + 1):
            chosen = _closest_cell(partition, positions[k])
            for i in range(layout.cells):
                assignment[layout.b(k, i)] = int(i == chosen)
        return assignment

    return round_to_cells


def plan(
    x0: FlatState,
    route: Route | np.ndarray,
    partition: ConvexPartition,
    config: MPCConfig | None = None,
    heading: float = 0.0,
    local_box: HPolytope | None = None,
    target: Point2 | None = None,
) -> PlanResult:
    """Solve one MPC problem toward the lookahead point on ``route``.

    ``target`` overrides the lookahead point when the caller already computed it.
    The solver stops as soon as its lower bound exceeds ``config.j_max``.
    """
    config = config or MPCConfig()
    if target is None:
        target = lookahead_reference(route, x0.position, config.lookahead)
    terminal = TerminalSpec(reference=target, deviation=regular_hexagon(config.terminal_radius))
    layout = VariableLayout(config.N, len(partition))
    problem = soften(
        build_problem(x0, terminal, partition, config, local_box=local_box), config.slack_weight
    )

    started = time.perf_counter()
    outcome: SolveOutcome = solve(
        problem,
        j_max=config.j_max,
        tolerances=Tolerances(abs_gap=config.abs_gap, rel_gap=config.rel_gap),
        iteration_limit=config.iteration_limit,
        rounding=cell_rounding(layout, partition),
    )
    stats = SolverStats(
        status=outcome.status,
        iterations=outcome.iterations,
        heuristic_solves=outcome.heuristic_solves,
        j_minus=outcome.j_minus,
        j_plus=outcome.j_plus,
        cells=len(partition),
        seconds=time.perf_counter() - started,
    )

    def as_plan() -> MotionPlan:
        return MotionPlan.from_solution(
            outcome.z_plus, layout, x0, config, heading, outcome.j_plus, stats, terminal
        )

    if outcome.status is SolveStatus.OPTIMAL:
        result = as_plan()
        logger.info(
            "[mpc] plan toward ({:.2f}, {:.2f}): j={:.4g} in {} iterations over {} cells",
            target.x,
            target.y,
            result.j,
            outcome.iterations,
            len(partition),
        )
        return result
    if outcome.status in (SolveStatus.BOUND_EXCEEDED, SolveStatus.INFEASIBLE_CERTIFIED):
        j_minus = math.inf if outcome.status is SolveStatus.INFEASIBLE_CERTIFIED else outcome.j_minus
        logger.info(
            "[mpc] re-plan requested: j-={:.6g} > j_max={} after {} iterations",
            j_minus,
            config.j_max,
            outcome.iterations,
        )
        return ReplanRequested(j_minus=j_minus, iterations=outcome.iterations, stats=stats)

    incumbent = as_plan() if outcome.z_plus is not None and outcome.j_plus <= config.j_max else None
    logger.warning(
        "[mpc] iteration limit after {} iterations (j-={:.4g}, j+={:.4g}, incumbent={})",
        outcome.iterations,
        outcome.j_minus,
        outcome.j_plus,
        incumbent is not None,
    )
    return PlanningStalled(
        incumbent=incumbent, j_minus=outcome.j_minus, iterations=outcome.iterations, stats=stats
    )
