"""Constrained Delaunay triangulation of free space with per-triangle circumcenters."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import shapely
from loguru import logger
from scipy.sparse.csgraph import connected_components

from navstack import metrics
from navstack.config import settings
from navstack.errors import DegenerateGeometryError, EmptyMeshError
from navstack.geometry.cdt import constrained_triangles, free_space_polygon
from navstack.geometry.sets import HPolytope, Point2


def circumcenters(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Circumcenter of every triangle, shape (m, 2)."""
    if len(triangles) == 0:
        return np.zeros((0, 2))
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    ab, ac = b - a, c - a
    d = 2.0 * (ab[:, 0] * ac[:, 1] - ab[:, 1] * ac[:, 0])
    if np.any(np.abs(d) <= 1e-15):
        raise DegenerateGeometryError("triangulation contains a zero-area triangle")
    ab2 = (ab**2).sum(axis=1)
    ac2 = (ac**2).sum(axis=1)
    ux = (ac[:, 1] * ab2 - ab[:, 1] * ac2) / d
    uy = (ab[:, 0] * ac2 - ac[:, 0] * ab2) / d
    return a + np.column_stack([ux, uy])


@dataclass(frozen=True, eq=False)
class TriangulationMesh:
    """Triangles over free space; ``neighbors[t]`` lists triangles sharing a side with ``t``."""

    vertices: np.ndarray
    triangles: np.ndarray
    neighbors: tuple[tuple[int, ...], ...]
    circumcenters: np.ndarray

    @classmethod
    def from_triangles(
        cls, vertices: Sequence[Sequence[float]] | np.ndarray, triangles: Sequence[Sequence[int]] | np.ndarray
    ) -> TriangulationMesh:
        verts = np.array(vertices, dtype=float).reshape(-1, 2)
        tris = np.array(triangles, dtype=int).reshape(-1, 3)
        sides: dict[tuple[int, int], list[int]] = {}
        for t, (i, j, k) in enumerate(tris):
            for u, v in ((i, j), (j, k), (k, i)):
                sides.setdefault((min(u, v), max(u, v)), []).append(t)
        nbrs: list[set[int]] = [set() for _ in range(len(tris))]
        for owners in sides.values():
            if len(owners) == 2:
                s, t = owners
                nbrs[s].add(t)
                nbrs[t].add(s)
        for a in (verts, tris):
            a.setflags(write=False)
        centers = circumcenters(verts, tris)
        centers.setflags(write=False)
        return cls(
            vertices=verts,
            triangles=tris,
            neighbors=tuple(tuple(sorted(n)) for n in nbrs),
            circumcenters=centers,
        )

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def degree(self, t: int) -> int:
        return len(self.neighbors[t])

    def circumcenter(self, t: int) -> Point2:
        return Point2.from_array(self.circumcenters[t])

    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Sparse shared-side adjacency between triangles."""
        m = self.n_triangles
        rows = [t for t in range(m) for _ in self.neighbors[t]]
        cols = [n for t in range(m) for n in self.neighbors[t]]
        return sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(m, m))

    @cached_property
    def component_labels(self) -> np.ndarray:
        """Connected-component label per triangle."""
        _, labels = connected_components(self.adjacency, directed=False)
        return labels

    def locate(self, p: Point2 | Sequence[float], tol: float = 1e-12) -> int | None:
        """Lowest-index triangle containing ``p`` (barycentric test), or None."""
        if self.n_triangles == 0:
            return None
        q = np.asarray(tuple(p), dtype=float)
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))

        def side(u: np.ndarray, v: np.ndarray) -> np.ndarray:
            return (v[:, 0] - u[:, 0]) * (q[1] - u[:, 1]) - (v[:, 1] - u[:, 1]) * (q[0] - u[:, 0])

        s1, s2, s3 = side(a, b), side(b, c), side(c, a)
        # Either winding is accepted so hand-built meshes work too.
        inside = ((s1 >= -tol) & (s2 >= -tol) & (s3 >= -tol)) | (
            (s1 <= tol) & (s2 <= tol) & (s3 <= tol)
        )
        hits = np.flatnonzero(inside)
        return int(hits[0]) if hits.size else None


def triangulate(
    box: HPolytope,
    obstacles: Sequence[HPolytope],
    max_edge: float | None = None,
    tol: float | None = None,
) -> TriangulationMesh:
    """Constrained Delaunay triangulation of ``box`` minus ``obstacles``.

    ``max_edge`` densifies the boundary first so circumcenters trace the medial
    axis more closely. Triangles whose centroid is outside free space are dropped.
    """
    tol = settings.geometry_tol if tol is None else tol
    region = free_space_polygon(box, obstacles, tol)
    vertices, triangles = constrained_triangles(region, max_edge=max_edge)
    if len(triangles):
        cen = vertices[triangles].mean(axis=1)
        keep = shapely.contains_xy(region, cen[:, 0], cen[:, 1])
        triangles = triangles[keep]
    mesh = TriangulationMesh.from_triangles(vertices, triangles)
    metrics.triangulations.inc()
    logger.info(
        "[mesh] {} triangles over {} vertices ({} obstacles)",
        mesh.n_triangles,
        len(vertices),
        len(obstacles),
    )
    return mesh


def nearest_circumcenter(mesh: TriangulationMesh, q_veh: Point2 | Sequence[float]) -> tuple[Point2, int]:
    """Circumcenter closest to ``q_veh`` (lowest triangle index on ties).

    When ``q_veh`` lies in a triangle the search is limited to that triangle's
    connected component, so the result is always reachable from the vehicle.
    """
    if mesh.n_triangles == 0:
        raise EmptyMeshError("nearest_circumcenter on an empty mesh")
    q = np.asarray(tuple(q_veh), dtype=float)
    dist = np.hypot(*(mesh.circumcenters - q).T)
    home = mesh.locate(q)
    if home is not None:
        dist = np.where(mesh.component_labels == mesh.component_labels[home], dist, np.inf)
    t = int(np.argmin(dist))
    return mesh.circumcenter(t), t
