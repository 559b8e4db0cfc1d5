"""Free-space polygons and their constrained Delaunay triangulation (shapely/GEOS)."""

from __future__ import annotations

from typing import Sequence

import numpy as np
import shapely
from shapely.geometry import GeometryCollection, MultiPolygon, Polygon
from shapely.geometry.polygon import orient
from shapely.geometry.base import BaseGeometry
from shapely.ops import unary_union

from navstack.errors import DegenerateGeometryError, GeometryError
from navstack.geometry.sets import HPolytope


def _checked_polygon(poly: HPolytope, what: str, tol: float) -> Polygon:
    if poly.is_empty():
        raise DegenerateGeometryError(f"{what} is empty, unbounded or has zero area")
    shape = poly.to_shapely()
    if shape.area <= tol or not shape.is_valid:
        raise DegenerateGeometryError(f"{what} is not a simple polygon with positive area")
    return shape


def free_space_polygon(
    box: HPolytope, obstacles: Sequence[HPolytope], tol: float = 1e-9
) -> BaseGeometry:
    """``box`` minus the union of ``obstacles`` (may be empty or multi-part)."""
    region = _checked_polygon(box, "bounding box", tol)
    holes = [_checked_polygon(o, f"obstacle {i}", tol) for i, o in enumerate(obstacles)]
    if holes:
        region = region.difference(unary_union(holes))
    return region


def polygon_parts(geom: BaseGeometry, min_area: float = 0.0) -> list[Polygon]:
    """Polygonal pieces of ``geom`` with area above ``min_area``, oriented counterclockwise."""
    if geom.is_empty:
        return []
    if isinstance(geom, Polygon):
        parts = [geom]
    elif isinstance(geom, (MultiPolygon, GeometryCollection)):
        parts = [g for g in geom.geoms if isinstance(g, Polygon)]
    else:
        return []
    return [orient(p, 1.0) for p in parts if p.area > min_area]


def constrained_triangles(
    region: BaseGeometry, decimals: int = 9, max_edge: float | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Triangulate ``region`` with its boundary edges as constraints.

    Returns ``(vertices, triangles)`` where ``vertices`` is ``(n, 2)`` and
    ``triangles`` is ``(m, 3)`` counterclockwise index triples. Coincident
    vertices (after rounding to ``decimals``) share an index.
    """
    if max_edge is not None:
        if max_edge <= 0:
            raise GeometryError(f"max_edge must be positive, got {max_edge}")
        region = shapely.segmentize(region, max_edge)

    index: dict[tuple[float, float], int] = {}
    vertices: list[tuple[float, float]] = []
    triangles: list[tuple[int, int, int]] = []

    def vertex_id(x: float, y: float) -> int:
        key = (round(x, decimals), round(y, decimals))
        if key not in index:
            index[key] = len(vertices)
            vertices.append((float(x), float(y)))
        return index[key]

    for part in polygon_parts(region):
        for tri in shapely.constrained_delaunay_triangles(part).geoms:
            coords = list(tri.exterior.coords)[:3]
            ids = [vertex_id(x, y) for x, y in coords]
            if len(set(ids)) < 3:
                continue
            (ax, ay), (bx, by), (cx, cy) = (vertices[i] for i in ids)
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if abs(cross) <= 10.0 ** (-decimals):
                continue
            if cross < 0:
                ids = [ids[0], ids[2], ids[1]]
            triangles.append((ids[0], ids[1], ids[2]))

    return np.array(vertices, dtype=float).reshape(-1, 2), np.array(triangles, dtype=int).reshape(-1, 3)
