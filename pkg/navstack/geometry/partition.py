"""Convex partition of obstacle-free space (Hertel–Mehlhorn over a constrained triangulation)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from loguru import logger
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

from navstack.config import settings
from navstack.geometry.cdt import constrained_triangles, free_space_polygon, polygon_parts
from navstack.geometry.sets import HPolytope, Point2, contains


@dataclass(frozen=True, eq=False)
class ConvexPartition:
    """Convex cells with disjoint interiors covering the free space inside ``bounding_box``."""

    cells: tuple[HPolytope, ...]
    bounding_box: HPolytope

    def __len__(self) -> int:
        return len(self.cells)

    def is_empty(self) -> bool:
        return not self.cells

    def area(self) -> float:
        return float(sum(c.area() for c in self.cells))

    def locate(self, p: Point2 | Sequence[float], tol: float = 0.0) -> int | None:
        """Index of the first cell containing ``p``."""
        for i, cell in enumerate(self.cells):
            if contains(cell, p, tol):
                return i
        return None

    def to_shapely(self) -> BaseGeometry:
        return unary_union([c.to_shapely() for c in self.cells])


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def _is_convex(loop: list[int], pts: np.ndarray, tol: float) -> bool:
    k = len(loop)
    for i in range(k):
        if _cross(pts[loop[i - 1]], pts[loop[i]], pts[loop[(i + 1) % k]]) < -tol:
            return False
    return True


def _splice(a: list[int], b: list[int], u: int, v: int) -> list[int]:
    """Join loops ``a`` (holding edge u→v) and ``b`` (holding v→u) across that edge."""
    ia = a.index(v)
    a_rot = a[ia:] + a[:ia]  # v ... u
    ib = b.index(u)
    b_rot = b[ib:] + b[:ib]  # u ... v
    return a_rot + b_rot[1:-1]


def _drop_collinear(loop: list[int], pts: np.ndarray, tol: float) -> list[int]:
    out = list(loop)
    changed = True
    while changed and len(out) > 3:
        changed = False
        for i in range(len(out)):
            if abs(_cross(pts[out[i - 1]], pts[out[i]], pts[out[(i + 1) % len(out)]])) <= tol:
                del out[i]
                changed = True
                break
    return out


def hertel_mehlhorn(pts: np.ndarray, triangles: np.ndarray, tol: float = 1e-9) -> list[list[int]]:
    """Merge counterclockwise triangles across diagonals whose removal keeps both pieces convex.

    Each diagonal is visited once in sorted order; removing a diagonal never
    makes a previously essential one inessential.
    """
    pieces: dict[int, list[int]] = {i: [int(v) for v in tri] for i, tri in enumerate(triangles)}
    owner: dict[tuple[int, int], int] = {}
    for pid, loop in pieces.items():
        for i in range(3):
            owner[(loop[i], loop[(i + 1) % 3])] = pid

    diagonals = sorted({(min(u, v), max(u, v)) for (u, v) in owner if (v, u) in owner})
    for u, v in diagonals:
        pa, pb = owner.get((u, v)), owner.get((v, u))
        if pa is None or pb is None or pa == pb:
            continue
        merged = _splice(pieces[pa], pieces[pb], u, v)
        if not _is_convex(merged, pts, tol):
            continue
        for i in range(len(pieces[pb])):
            owner[(pieces[pb][i], pieces[pb][(i + 1) % len(pieces[pb])])] = pa
        del owner[(u, v)], owner[(v, u)]
        pieces[pa] = merged
        del pieces[pb]

    return [_drop_collinear(pieces[k], pts, tol) for k in sorted(pieces)]


def partition_free_space(
    box: HPolytope, obstacles: Sequence[HPolytope], tol: float | None = None
) -> ConvexPartition:
    """Partition ``box`` minus ``obstacles`` into convex cells.

    An empty free space yields an empty partition; degenerate obstacles raise
    :class:`~navstack.errors.DegenerateGeometryError`.
    """
    tol = settings.geometry_tol if tol is None else tol
    region = free_space_polygon(box, obstacles, tol)
    if not polygon_parts(region, min_area=tol):
        logger.debug("[partition] free space is empty ({} obstacles)", len(obstacles))
        return ConvexPartition(cells=(), bounding_box=box)

    pts, triangles = constrained_triangles(region)
    cells = []
    for loop in hertel_mehlhorn(pts, triangles, tol):
        cells.append(HPolytope.from_vertices(pts[loop]))
    logger.debug(
        "[partition] {} triangles merged into {} convex cells", len(triangles), len(cells)
    )
    return ConvexPartition(cells=tuple(cells), bounding_box=box)
