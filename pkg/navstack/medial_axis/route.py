"""Routes through the corridor graph, as consumed by the MPC lookahead."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from navstack.geometry.sets import Point2


def polyline_length(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    return float(np.hypot(*np.diff(points, axis=0).T).sum())


@dataclass(frozen=True, eq=False)
class Chain:
    """One corridor: circumcenter polyline between graph nodes ``ends[0]`` and ``ends[1]``.

    ``triangles`` is the triangle sequence the polyline was read from. Temporary
    chains (endpoint attachments, backtracks) record the persistent corridor they
    run along in ``parent``.
    """

    id: int
    ends: tuple[int, int]
    triangles: tuple[int, ...]
    points: np.ndarray
    temporary: bool = False
    parent: int | None = None

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def length(self) -> float:
        return polyline_length(self.points)

    def oriented(self, start_node: int) -> np.ndarray:
        """Polyline walked from ``start_node`` to the other end."""
        return self.points if self.ends[0] == start_node else self.points[::-1]

    def locate(self, p: Point2, tol: float) -> int | None:
        """Index of the polyline point equal to ``p`` within ``tol``."""
        hits = np.flatnonzero(np.hypot(*(self.points - p.as_array()).T) <= tol)
        return int(hits[0]) if hits.size else None


@dataclass(frozen=True, eq=False)
class RouteLeg:
    chain: Chain
    src: int
    dst: int

    @property
    def points(self) -> np.ndarray:
        return self.chain.oriented(self.src)


@dataclass(frozen=True, eq=False)
class Route:
    """Chains in travel order; consecutive legs share a node."""

    legs: tuple[RouteLeg, ...]
    nodes: tuple[int, ...]
    origin: Point2

    @property
    def cost(self) -> float:
        return float(sum(leg.chain.length for leg in self.legs))

    @property
    def polyline(self) -> np.ndarray:
        """Flattened waypoint array with the shared joints de-duplicated."""
        if not self.legs:
            return self.origin.as_array().reshape(1, 2)
        parts = [self.legs[0].points]
        for leg in self.legs[1:]:
            parts.append(leg.points[1:])
        return np.vstack(parts)

    def waypoints(self) -> list[Point2]:
        return [Point2.from_array(p) for p in self.polyline]

    def chain_ids(self) -> list[int]:
        return [leg.chain.id for leg in self.legs]

    def export(self) -> dict[str, Any]:
        return {
            "nodes": list(self.nodes),
            "chains": self.chain_ids(),
            "cost": self.cost,
            "waypoints": self.polyline.tolist(),
        }


@dataclass(frozen=True)
class NoRoute:
    start: int
    goal: int
    reason: str = "disconnected"
