"""Closed-loop episodes: global route, MPC, path-following controller and plant.

Planning is treated as instantaneous on the simulation clock, so an episode
depends only on its scenario and configuration. Wall-clock times are logged
for reference.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd
import shapely
from loguru import logger
from pydantic import BaseModel, Field, model_validator
from shapely.ops import unary_union

from navstack import metrics
from navstack.config import settings
from navstack.errors import CorridorNotFoundError, NavStackError
from navstack.geometry.sets import Point2
from navstack.harness.local_map import local_map
from navstack.harness.scenario import Scenario
from navstack.harness.schemas import (
    LogRecord,
    Outcome,
    OutcomeRecord,
    PlanEvent,
    ReplanEvent,
    RouteVersion,
    TelemetryRecord,
    record_adapter,
)
from navstack.medial_axis import (
    MedialAxisGraph,
    NoRoute,
    Route,
    add_backtrack_edge,
    attach_endpoints,
    backtrack_target,
    build_graph,
    nearest_circumcenter,
    reattach_goal,
    remove_current_corridor,
    shortest_route,
    triangulate,
)
from navstack.mpc import (
    FlatState,
    MotionPlan,
    MPCConfig,
    PlanningStalled,
    PlanReference,
    PlanResult,
    ReplanRequested,
    lookahead_reference,
    plan,
    route_progress,
)
from navstack.vehicle import (
    ActuatorSetpoint,
    ControllerGains,
    PlantParams,
    UnicycleState,
    control,
    step,
)

_SECTIONS = ("mpc", "gains", "plant")


class EpisodeConfig(BaseModel):
    """Everything a closed-loop run needs besides the scenario."""

    mpc: MPCConfig = Field(default_factory=MPCConfig)
    gains: ControllerGains = Field(default_factory=ControllerGains)
    plant: PlantParams = Field(default_factory=PlantParams)
    plant_dt: float = Field(default_factory=lambda: settings.plant_dt, gt=0, le=0.02)
    control_dt: float = Field(default_factory=lambda: settings.control_dt, gt=0)
    time_limit: float = Field(default_factory=lambda: settings.time_limit, gt=0)
    goal_tolerance: float = Field(default_factory=lambda: settings.goal_tolerance, gt=0)
    goal_speed: float = Field(default_factory=lambda: settings.goal_speed, gt=0)
    local_map_size: float = Field(default_factory=lambda: settings.local_map_size, gt=0)
    max_replans: int = Field(default_factory=lambda: settings.max_replans, ge=0)
    boundary_max_edge: float | None = Field(default_factory=lambda: settings.boundary_max_edge)

    @model_validator(mode="after")
    def check_periods(self) -> EpisodeConfig:
        for name, period, base in (
            ("control_dt", self.control_dt, self.plant_dt),
            ("mpc.dt", self.mpc.dt, self.control_dt),
        ):
            ratio = period / base
            if ratio < 1 - 1e-9 or abs(ratio - round(ratio)) > 1e-6:
                raise ValueError(f"{name}={period} must be a whole multiple of {base}")
        return self

    @property
    def control_every(self) -> int:
        return round(self.control_dt / self.plant_dt)

    @property
    def steps_per_period(self) -> int:
        return round(self.mpc.dt / self.plant_dt)

    def with_overrides(self, overrides: Mapping[str, Mapping[str, Any]]) -> EpisodeConfig:
        """Merge per-section overrides (``mpc``, ``gains``, ``plant``, ``episode``) and revalidate."""
        data = self.model_dump()
        for section, values in overrides.items():
            if section == "episode":
                data.update(values)
            elif section in _SECTIONS:
                data[section] = {**data[section], **values}
            else:
                raise ValueError(f"unknown override section {section!r}")
        return EpisodeConfig.model_validate(data)


# ---------------------------------------------------------------------------
# Episode log
# ---------------------------------------------------------------------------


@dataclass
class EpisodeLog:
    records: list[LogRecord] = field(default_factory=list)

    def add(self, record: LogRecord) -> None:
        self.records.append(record)

    def _of(self, kind: type) -> list:
        return [r for r in self.records if isinstance(r, kind)]

    @property
    def telemetry(self) -> list[TelemetryRecord]:
        return self._of(TelemetryRecord)

    @property
    def plans(self) -> list[PlanEvent]:
        return self._of(PlanEvent)

    @property
    def replans(self) -> list[ReplanEvent]:
        return self._of(ReplanEvent)

    @property
    def routes(self) -> list[RouteVersion]:
        return self._of(RouteVersion)

    @property
    def outcome(self) -> Outcome | None:
        ends = self._of(OutcomeRecord)
        return ends[-1].outcome if ends else None

    def telemetry_frame(self) -> pd.DataFrame:
        columns = ["t", "x", "y", "theta", "v", "omega", "clearance"]
        rows = [r.model_dump(include=set(columns)) for r in self.telemetry]
        return pd.DataFrame(rows, columns=columns)

    def summary(self) -> dict[str, Any]:
        frame = self.telemetry_frame()
        path = float(np.hypot(frame["x"].diff(), frame["y"].diff()).sum()) if len(frame) else 0.0
        return {
            "outcome": self.outcome.value if self.outcome else None,
            "duration_s": float(frame["t"].max()) if len(frame) else 0.0,
            "plans": len(self.plans),
            "replans": len(self.replans),
            "route_versions": len(self.routes),
            "path_length_m": path,
            "min_clearance_m": float(frame["clearance"].min()) if len(frame) else math.inf,
            "max_iterations": max((p.iterations for p in self.plans), default=0),
        }

    def write_jsonl(self, path: Path) -> Path:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for record in self.records:
                fh.write(record.model_dump_json() + "\n")
        return path

    @classmethod
    def read_jsonl(cls, path: Path) -> EpisodeLog:
        with path.open(encoding="utf-8") as fh:
            return cls([record_adapter.validate_json(line) for line in fh if line.strip()])


# ---------------------------------------------------------------------------
# Closed loop
# ---------------------------------------------------------------------------


class Episode:
    """One run of the planning stack on a scenario."""

    def __init__(self, scenario: Scenario, config: EpisodeConfig | None = None):
        self.scenario = scenario
        self.config = (config or EpisodeConfig()).with_overrides(scenario.overrides)
        self.log = EpisodeLog()
        self.t = 0.0
        self.state = UnicycleState(scenario.start.x, scenario.start.y, scenario.start_heading)
        self.reference: PlanReference | None = None
        self.route: Route | None = None
        self.version = 0
        self.progress = 0.0
        self.replan_count = 0
        obstacles = [o.to_shapely() for o in scenario.obstacles]
        self._obstacles = unary_union(obstacles) if obstacles else None
        if self._obstacles is not None:
            shapely.prepare(self._obstacles)

    # Global planner -------------------------------------------------------------

    def _build_global(self) -> None:
        self.mesh = triangulate(
            self.scenario.arena, self.scenario.mapped, max_edge=self.config.boundary_max_edge
        )
        self.graph: MedialAxisGraph = build_graph(self.mesh)
        self.start_id, self.goal_id = attach_endpoints(
            self.graph, self.mesh, self.scenario.start, self.scenario.goal
        )

    def _set_route(self, route: Route) -> None:
        self.route = route
        self.version += 1
        self.progress = 0.0
        self.log.add(
            RouteVersion(
                t=self.t,
                version=self.version,
                nodes=list(route.nodes),
                chains=route.chain_ids(),
                cost=route.cost,
                waypoints=[tuple(p) for p in route.polyline.tolist()],
            )
        )
        logger.info("[episode] route v{}: {} chains, {:.2f} m", self.version, len(route.legs), route.cost)

    def _replan(self, request: ReplanRequested) -> NoRoute | None:
        """Delete the occupied corridor, add a backtrack edge and search again."""
        assert self.route is not None
        q = self.state.position
        started = time.perf_counter()
        with metrics.replan_seconds.time():
            p_near, _ = nearest_circumcenter(self.mesh, q)
            try:
                deletion = remove_current_corridor(self.graph, self.route, p_near)
            except CorridorNotFoundError:
                line = shapely.LineString(self.route.polyline)
                closest = line.interpolate(line.project(shapely.Point(q.x, q.y)))
                logger.warning(
                    "[episode] nearest circumcenter is off the route; using the closest route point"
                )
                deletion = remove_current_corridor(
                    self.graph, self.route, Point2(closest.x, closest.y), tol=1e-6
                )
            if self.graph.graph.degree(self.goal_id) == 0:
                self.goal_id = reattach_goal(self.graph, self.mesh, self.goal_id, self.scenario.goal)
            backtrack = add_backtrack_edge(
                self.graph, q, backtrack_target(self.graph, self.route, deletion)
            )
            result = shortest_route(self.graph, backtrack, self.goal_id)
        metrics.replans.inc()
        self.log.add(
            ReplanEvent(
                t=self.t,
                j_minus=request.j_minus,
                iterations=request.iterations,
                removed_chains=list(deletion.removed),
                backtrack_node=backtrack,
                wall_seconds=time.perf_counter() - started,
            )
        )
        if isinstance(result, NoRoute):
            return result
        self._set_route(result)
        return None

    # MPC --------------------------------------------------------------------------

    def _plan_event(self, result: PlanResult, target: Point2, wall: float, accepted: bool) -> None:
        stats = result.stats
        self.log.add(
            PlanEvent(
                t=self.t,
                status=stats.status.value,
                iterations=stats.iterations,
                heuristic_solves=stats.heuristic_solves,
                j_minus=result.j_minus if isinstance(result, ReplanRequested) else stats.j_minus,
                j_plus=stats.j_plus,
                cells=stats.cells,
                target=(target.x, target.y),
                max_slack=result.max_slack if isinstance(result, MotionPlan) else 0.0,
                accepted=accepted,
                wall_seconds=wall,
            )
        )

    def _mpc_step(self) -> OutcomeRecord | None:
        cfg = self.config
        q = self.state.position
        self.progress = route_progress(self.route.polyline, q, self.progress)
        target = lookahead_reference(self.route, q, cfg.mpc.lookahead, self.progress)
        center = Point2((q.x + target.x) / 2, (q.y + target.y) / 2)
        partition, box = local_map(
            self.scenario, q, margin=cfg.mpc.bloat_margin, center=center, size=cfg.local_map_size
        )
        x0 = FlatState(q.x, q.y, *self.state.velocity())
        started = time.perf_counter()
        result = plan(
            x0, self.route, partition, cfg.mpc, heading=self.state.theta, local_box=box, target=target
        )
        wall = time.perf_counter() - started

        if isinstance(result, MotionPlan):
            self.reference = result.reference(self.t)
            self._plan_event(result, target, wall, accepted=True)
        elif isinstance(result, PlanningStalled):
            if result.incumbent is not None:
                self.reference = result.incumbent.reference(self.t)
            self._plan_event(result, target, wall, accepted=result.incumbent is not None)
        else:
            self._plan_event(result, target, wall, accepted=False)
            self.replan_count += 1
            if self.replan_count > cfg.max_replans:
                return OutcomeRecord(t=self.t, outcome=Outcome.STUCK, reason="re-plan budget exhausted")
            no_route = self._replan(result)
            if no_route is not None:
                return OutcomeRecord(t=self.t, outcome=Outcome.STUCK, reason="no route after corridor deletion")
        return None

    # Plant ------------------------------------------------------------------------

    def _clearance(self, x: float, y: float) -> float:
        if self._obstacles is None:
            return math.inf
        return float(shapely.distance(self._obstacles, shapely.Point(x, y)))

    def _at_goal(self) -> bool:
        s = self.state
        return (
            s.position.distance(self.scenario.goal) <= self.config.goal_tolerance
            and abs(s.v) < self.config.goal_speed
        )

    def _simulate_period(self) -> bool:
        """Advance one MPC period; True once the goal is reached."""
        cfg = self.config
        setpoint = ActuatorSetpoint(0.0, 0.0)
        for k in range(cfg.steps_per_period):
            if k % cfg.control_every == 0:
                if self.reference is None:
                    setpoint = ActuatorSetpoint(0.0, 0.0)
                else:
                    ref = self.reference.at(self.t)
                    setpoint = control(
                        self.state, ref.position, ref.v, ref.theta, ref.omega, cfg.gains, cfg.plant
                    )
            self.state = step(self.state, setpoint, cfg.plant_dt, cfg.plant.tau_v, cfg.plant.tau_omega)
            self.t = round(self.t + cfg.plant_dt, 9)
            s = self.state
            self.log.add(
                TelemetryRecord(
                    t=self.t, x=s.x, y=s.y, theta=s.theta, v=s.v, omega=s.omega,
                    clearance=self._clearance(s.x, s.y),
                )
            )
            if self._at_goal():
                return True
        return False

    def run(self) -> EpisodeLog:
        try:
            ending = self._loop()
        except NavStackError as e:
            logger.error("[episode] aborted: {}", e)
            ending = OutcomeRecord(t=self.t, outcome=Outcome.STUCK, reason=f"{type(e).__name__}: {e}")
        self.log.add(ending)
        logger.info("[episode] {} at t={:.2f} s ({})", ending.outcome.value, ending.t, ending.reason)
        return self.log

    def _loop(self) -> OutcomeRecord:
        self._build_global()
        first = shortest_route(self.graph, self.start_id, self.goal_id)
        if isinstance(first, NoRoute):
            return OutcomeRecord(t=self.t, outcome=Outcome.STUCK, reason="no initial route")
        self._set_route(first)

        while True:
            if self._at_goal():
                return OutcomeRecord(t=self.t, outcome=Outcome.GOAL_REACHED)
            if self.t >= self.config.time_limit:
                return OutcomeRecord(t=self.t, outcome=Outcome.TIMEOUT, reason="time limit")
            stop = self._mpc_step()
            if stop is not None:
                return stop
            if self._simulate_period():
                return OutcomeRecord(t=self.t, outcome=Outcome.GOAL_REACHED)


def run_episode(scenario: Scenario, config: EpisodeConfig | None = None) -> EpisodeLog:
    """Simulate ``scenario`` until the goal is reached, no route is left or time runs out."""
    return Episode(scenario, config).run()

