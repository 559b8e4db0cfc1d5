"""Scenarios: arena, mapped and unmapped obstacles, start pose and goal."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from loguru import logger
from pydantic import ValidationError
from shapely.geometry import Point as ShapelyPoint

from navstack.config import settings
from navstack.errors import EndpointNotFreeError, ScenarioFileError, ScenarioGenerationError
from navstack.geometry.sets import HPolytope, Point2
from navstack.harness.schemas import (
    ArenaModel,
    PolygonModel,
    PoseModel,
    PositionModel,
    ScenarioFile,
)


@dataclass(frozen=True, eq=False)
class Scenario:
    seed: int
    arena: HPolytope
    mapped: tuple[HPolytope, ...]
    unmapped: tuple[HPolytope, ...]
    start: Point2
    goal: Point2
    start_heading: float = 0.0
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)

    @property
    def obstacles(self) -> tuple[HPolytope, ...]:
        return self.mapped + self.unmapped

    def to_file(self) -> ScenarioFile:
        xmin, ymin, xmax, ymax = self.arena.bounds()

        def poly(p: HPolytope) -> PolygonModel:
            return PolygonModel(vertices_m=[(float(x), float(y)) for x, y in p.vertices])

        return ScenarioFile(
            seed=self.seed,
            arena=ArenaModel(xmin_m=xmin, ymin_m=ymin, xmax_m=xmax, ymax_m=ymax),
            mapped_obstacles=[poly(p) for p in self.mapped],
            unmapped_obstacles=[poly(p) for p in self.unmapped],
            start=PoseModel(x_m=self.start.x, y_m=self.start.y, theta_rad=self.start_heading),
            goal=PositionModel(x_m=self.goal.x, y_m=self.goal.y),
            overrides=self.overrides,
        )

    @classmethod
    def from_file(cls, data: ScenarioFile) -> Scenario:
        a = data.arena
        return cls(
            seed=data.seed,
            arena=HPolytope.from_box(a.xmin_m, a.ymin_m, a.xmax_m, a.ymax_m),
            mapped=tuple(HPolytope.from_vertices(p.vertices_m) for p in data.mapped_obstacles),
            unmapped=tuple(HPolytope.from_vertices(p.vertices_m) for p in data.unmapped_obstacles),
            start=Point2(data.start.x_m, data.start.y_m),
            goal=Point2(data.goal.x_m, data.goal.y_m),
            start_heading=data.start.theta_rad,
            overrides=data.overrides,
        )


def save_scenario(scenario: Scenario, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(scenario.to_file().model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def check_endpoints(scenario: Scenario) -> None:
    """Raise EndpointNotFreeError unless start and goal lie strictly inside the free space."""
    arena = scenario.arena.to_shapely()
    for name, p in (("start", scenario.start), ("goal", scenario.goal)):
        point = ShapelyPoint(p.x, p.y)
        if not arena.contains(point):
            raise EndpointNotFreeError(f"{name} ({p.x}, {p.y}) lies outside the arena")
        for k, obstacle in enumerate(scenario.obstacles):
            if obstacle.to_shapely().intersects(point):
                n_mapped = len(scenario.mapped)
                kind, index = ("mapped", k) if k < n_mapped else ("unmapped", k - n_mapped)
                raise EndpointNotFreeError(f"{name} ({p.x}, {p.y}) lies on {kind} obstacle {index}")


def load_scenario(path: Path) -> Scenario:
    """Read and validate a scenario file; start and goal must be in free space."""
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        scenario = Scenario.from_file(ScenarioFile.model_validate(raw))
    except FileNotFoundError as e:
        raise ScenarioFileError(f"scenario file not found: {path}") from e
    except (json.JSONDecodeError, ValidationError) as e:
        raise ScenarioFileError(f"invalid scenario file {path}: {e}") from e
    check_endpoints(scenario)
    return scenario


# ---------------------------------------------------------------------------
# Random maps
# ---------------------------------------------------------------------------


def _random_polygon(rng: np.random.Generator, center: np.ndarray, radius: float) -> HPolytope:
    """Convex polygon with 4-7 vertices on a circle, spread so no angle is very sharp."""
    k = int(rng.integers(4, 8))
    spacing = 2 * math.pi / k
    angles = rng.uniform(0, 2 * math.pi) + spacing * (np.arange(k) + rng.uniform(-0.3, 0.3, k))
    verts = center + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return HPolytope.from_vertices(verts)


def _place(
    rng: np.random.Generator,
    placed: list[HPolytope],
    arena: HPolytope,
    size_range: tuple[float, float],
    keep_clear: tuple[Point2, ...],
    clearance: float,
    max_attempts: int,
) -> HPolytope:
    xmin, ymin, xmax, ymax = arena.bounds()
    arena_shape = arena.to_shapely()
    others = [p.to_shapely() for p in placed]
    for _ in range(max_attempts):
        radius = float(rng.uniform(*size_range))
        center = np.array([rng.uniform(xmin + radius, xmax - radius), rng.uniform(ymin + radius, ymax - radius)])
        candidate = _random_polygon(rng, center, radius)
        shape = candidate.to_shapely()
        if not arena_shape.contains(shape):
            continue
        if any(shape.intersects(o) for o in others):
            continue
        if any(shape.distance(ShapelyPoint(p.x, p.y)) < clearance for p in keep_clear):
            continue
        return candidate
    raise ScenarioGenerationError(f"could not place an obstacle after {max_attempts} attempts")


def generate_map(
    seed: int,
    arena: tuple[float, float, float, float] = (0.0, 0.0, 10.0, 10.0),
    counts: tuple[int, int] = (6, 4),
    mapped_size: tuple[float, float] = (0.6, 1.2),
    unmapped_size: tuple[float, float] = (0.15, 0.4),
    start: Point2 | None = None,
    goal: Point2 | None = None,
    robot_radius: float | None = None,
    max_attempts: int = 2000,
) -> Scenario:
    """Random obstacle map; the same arguments always produce the same scenario.

    Sizes are circumradii. Mapped obstacles draw from the larger range and
    unmapped ones from the smaller; each keeps a robot diameter of clearance
    from the start and the goal and never overlaps another obstacle.
    """
    n_mapped, n_unmapped = counts
    if n_mapped < 0 or n_unmapped < 0:
        raise ScenarioGenerationError(f"obstacle counts must be nonnegative, got {counts}")
    for low, high in (mapped_size, unmapped_size):
        if not 0 < low <= high:
            raise ScenarioGenerationError(f"invalid size range ({low}, {high})")
    if unmapped_size[1] > mapped_size[0]:
        raise ScenarioGenerationError("unmapped obstacles must be smaller than mapped ones")

    robot_radius = settings.robot_radius if robot_radius is None else robot_radius
    box = HPolytope.from_box(*arena)
    xmin, ymin, xmax, ymax = arena
    start = start or Point2(xmin + 1.0, ymin + 1.0)
    goal = goal or Point2(xmax - 1.0, ymax - 1.0)
    for p in (start, goal):
        if not box.contains(p):
            raise ScenarioGenerationError(f"({p.x}, {p.y}) lies outside the arena")

    rng = np.random.default_rng(seed)
    placed: list[HPolytope] = []
    for size_range, count in ((mapped_size, n_mapped), (unmapped_size, n_unmapped)):
        for _ in range(count):
            placed.append(
                _place(rng, placed, box, size_range, (start, goal), 2 * robot_radius, max_attempts)
            )

    heading = math.atan2(goal.y - start.y, goal.x - start.x)
    logger.info("[scenario] seed={} with {} mapped and {} unmapped obstacles", seed, n_mapped, n_unmapped)
    return Scenario(
        seed=seed,
        arena=box,
        mapped=tuple(placed[:n_mapped]),
        unmapped=tuple(placed[n_mapped:]),
        start=start,
        goal=goal,
        start_heading=heading,
    )
