"""Convex-set primitives: points, halfspace polytopes and 2-D zonotopes.

All values are immutable after construction; their numpy buffers are marked
read-only so instances can be shared freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError
from shapely.geometry import Polygon

from navstack.errors import DegenerateGeometryError, GeometryError, InvalidRadiusError

_PARALLEL_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Point2:
    """A position in the plane (meters)."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"Point2 coordinates must be finite, got ({self.x}, {self.y})")

    @classmethod
    def from_array(cls, a: Sequence[float] | np.ndarray) -> Point2:
        return cls(float(a[0]), float(a[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])

    def distance(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def __iter__(self):  # allows tuple(p) and np.asarray(list_of_points)
        yield self.x
        yield self.y


@dataclass(frozen=True, eq=False)
class HPolytope:
    """Intersection of halfspaces ``normals[i] · p <= offsets[i]``."""

    normals: np.ndarray
    offsets: np.ndarray

    def __post_init__(self) -> None:
        normals = np.atleast_2d(np.asarray(self.normals, dtype=float))
        offsets = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        if normals.size == 0:
            normals = normals.reshape(0, 2)
        if normals.ndim != 2 or normals.shape[1] != 2:
            raise GeometryError(f"normals must have shape (m, 2), got {normals.shape}")
        if offsets.shape != (normals.shape[0],):
            raise GeometryError(
                f"offsets must have shape ({normals.shape[0]},), got {offsets.shape}"
            )
        if np.isnan(normals).any() or np.isnan(offsets).any():
            raise GeometryError("HPolytope entries must not be NaN")
        object.__setattr__(self, "normals", _frozen(normals))
        object.__setattr__(self, "offsets", _frozen(offsets))

    # Constructors -------------------------------------------------------------

    @classmethod
    def from_box(cls, xmin: float, ymin: float, xmax: float, ymax: float) -> HPolytope:
        normals = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]
        return cls(np.array(normals), np.array([xmax, ymax, -xmin, -ymin]))

    @classmethod
    def from_vertices(cls, vertices: Iterable[Sequence[float]], tol: float = 1e-12) -> HPolytope:
        """Build the halfspace form of a convex polygon given by its vertex loop.

        Either orientation is accepted; zero-length edges are skipped.
        """
        pts = np.asarray([tuple(v) for v in vertices], dtype=float)
        if len(pts) > 1 and np.allclose(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < 3:
            raise DegenerateGeometryError(f"polygon needs at least 3 vertices, got {len(pts)}")
        x, y = pts[:, 0], pts[:, 1]
        signed_area = 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))
        if abs(signed_area) <= tol:
            raise DegenerateGeometryError("polygon has zero area")
        if signed_area < 0:
            pts = pts[::-1]

        normals, offsets = [], []
        for p, q in zip(pts, np.roll(pts, -1, axis=0)):
            edge = q - p
            length = float(np.hypot(*edge))
            if length <= tol:
                continue
            n = np.array([edge[1], -edge[0]]) / length
            normals.append(n)
            offsets.append(float(n @ p))
        return cls(np.array(normals), np.array(offsets))

    # Queries ------------------------------------------------------------------

    @property
    def n_halfspaces(self) -> int:
        return int(self.offsets.shape[0])

    def contains(self, p: Point2 | Sequence[float], tol: float = 0.0) -> bool:
        return contains(self, p, tol)

    def normalized(self) -> HPolytope:
        """Same set with unit-length normals; zero rows that are always true are dropped."""
        norms = np.linalg.norm(self.normals, axis=1)
        zero = norms <= _PARALLEL_TOL
        if np.any(self.offsets[zero] < 0):
            raise GeometryError("HPolytope has a zero normal with a negative offset (empty set)")
        keep = ~zero
        return HPolytope(self.normals[keep] / norms[keep, None], self.offsets[keep] / norms[keep])

    @cached_property
    def vertices(self) -> np.ndarray:
        """Counterclockwise vertex loop, shape (k, 2); empty when the interior is empty."""
        poly = self.normalized()
        m = poly.n_halfspaces
        candidates = []
        for i in range(m):
            for j in range(i + 1, m):
                a = np.vstack([poly.normals[i], poly.normals[j]])
                if abs(np.linalg.det(a)) <= _PARALLEL_TOL:
                    continue
                p = np.linalg.solve(a, np.array([poly.offsets[i], poly.offsets[j]]))
                if np.all(poly.normals @ p <= poly.offsets + 1e-9):
                    candidates.append(p)
        if len(candidates) < 3:
            return _frozen(np.zeros((0, 2)))
        pts = np.unique(np.round(np.array(candidates), 12), axis=0)
        try:
            hull = ConvexHull(pts)
        except (QhullError, ValueError):
            return _frozen(np.zeros((0, 2)))
        # ConvexHull orders 2-D vertices counterclockwise.
        return _frozen(pts[hull.vertices])

    def is_empty(self) -> bool:
        return len(self.vertices) < 3

    def area(self) -> float:
        v = self.vertices
        if len(v) < 3:
            return 0.0
        x, y = v[:, 0], v[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))

    def bounds(self) -> tuple[float, float, float, float]:
        v = self.vertices
        if len(v) == 0:
            raise GeometryError("bounds of an empty or unbounded polytope")
        return float(v[:, 0].min()), float(v[:, 1].min()), float(v[:, 0].max()), float(v[:, 1].max())

    def support(self, direction: Sequence[float]) -> float:
        v = self.vertices
        if len(v) == 0:
            raise GeometryError("support of an empty or unbounded polytope")
        return float(np.max(v @ np.asarray(direction, dtype=float)))

    def translate(self, offset: Sequence[float]) -> HPolytope:
        return HPolytope(self.normals, self.offsets + self.normals @ np.asarray(offset, dtype=float))

    def to_shapely(self) -> Polygon:
        v = self.vertices
        if len(v) < 3:
            raise DegenerateGeometryError("polytope has an empty interior")
        return Polygon(v)


@dataclass(frozen=True, eq=False)
class Zonotope:
    """``center ⊕ {Σ ξ_i g_i : ξ_i ∈ [-1, 1]}`` in the plane."""

    center: np.ndarray
    generators: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self) -> None:
        c = np.asarray(self.center, dtype=float).reshape(-1)
        g = np.asarray(self.generators, dtype=float)
        if g.size == 0:
            g = g.reshape(0, 2)
        if c.shape != (2,) or g.ndim != 2 or g.shape[1] != 2:
            raise GeometryError(
                f"Zonotope expects a 2-vector center and (k, 2) generators, got {c.shape}, {g.shape}"
            )
        object.__setattr__(self, "center", _frozen(c))
        object.__setattr__(self, "generators", _frozen(g))

    @property
    def order(self) -> int:
        return int(self.generators.shape[0])

    def __add__(self, other: Zonotope) -> Zonotope:
        return minkowski_sum(self, other)

    def translate(self, offset: Sequence[float]) -> Zonotope:
        return Zonotope(self.center + np.asarray(offset, dtype=float), self.generators)

    def scale(self, factor: float) -> Zonotope:
        return Zonotope(factor * self.center, factor * self.generators)

    def support(self, direction: Sequence[float]) -> float:
        d = np.asarray(direction, dtype=float)
        return float(d @ self.center + np.abs(self.generators @ d).sum())

    def _reduced_generators(self) -> np.ndarray:
        """Generators with zero rows dropped, parallel ones merged, angles in [0, π)."""
        merged: list[np.ndarray] = []
        for g in self.generators:
            if np.hypot(*g) <= _PARALLEL_TOL:
                continue
            if g[1] < 0 or (g[1] == 0 and g[0] < 0):
                g = -g
            for k, h in enumerate(merged):
                if abs(h[0] * g[1] - h[1] * g[0]) <= _PARALLEL_TOL * max(1.0, np.hypot(*h)):
                    merged[k] = h + g
                    break
            else:
                merged.append(np.array(g, dtype=float))
        merged.sort(key=lambda g: math.atan2(g[1], g[0]))
        return np.array(merged).reshape(-1, 2)

    def vertices(self) -> np.ndarray:
        """Counterclockwise vertex loop of the zonotope."""
        gens = self._reduced_generators()
        if len(gens) == 0:
            return self.center.reshape(1, 2).copy()
        p = self.center - gens.sum(axis=0)
        loop = [p]
        for g in gens:
            p = p + 2 * g
            loop.append(p)
        for g in gens[:-1]:
            p = p - 2 * g
            loop.append(p)
        return np.array(loop)

    def to_hpolytope(self) -> HPolytope:
        """Exact halfspace form (2-D zonotopes have one facet pair per generator direction)."""
        gens = self._reduced_generators()
        directions = [np.array([-g[1], g[0]]) / np.hypot(*g) for g in gens]
        if len(gens) < 2:
            # Segments and points get caps along the axes (or along the segment).
            if len(gens) == 1:
                directions.append(gens[0] / np.hypot(*gens[0]))
            else:
                directions += [np.array([1.0, 0.0]), np.array([0.0, 1.0])]
        normals, offsets = [], []
        for d in directions:
            for s in (1.0, -1.0):
                normals.append(s * d)
                offsets.append(self.support(s * d))
        return HPolytope(np.array(normals), np.array(offsets))


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def contains(poly: HPolytope, p: Point2 | Sequence[float], tol: float = 0.0) -> bool:
    """True iff ``n_i · p <= d_i + tol`` for every halfspace."""
    if tol < 0:
        raise GeometryError(f"tol must be nonnegative, got {tol}")
    q = np.asarray(tuple(p), dtype=float)
    return bool(np.all(poly.normals @ q <= poly.offsets + tol))


def minkowski_sum(a: Zonotope, b: Zonotope) -> Zonotope:
    return Zonotope(a.center + b.center, np.vstack([a.generators, b.generators]))


def regular_hexagon(circumradius: float) -> Zonotope:
    """Origin-centered regular hexagon with three generators of length r/2."""
    if not circumradius > 0:
        raise InvalidRadiusError(f"circumradius must be positive, got {circumradius}")
    angles = np.deg2rad([0.0, 60.0, 120.0])
    gens = 0.5 * circumradius * np.column_stack([np.cos(angles), np.sin(angles)])
    return Zonotope(np.zeros(2), gens)


def bloat(obstacle: HPolytope, margin: float) -> HPolytope:
    """Offset every (unit-normalized) halfspace outward by ``margin``."""
    if margin < 0:
        raise GeometryError(f"bloat margin must be nonnegative, got {margin}")
    unit = obstacle.normalized()
    return HPolytope(unit.normals, unit.offsets + margin)


def support(s: HPolytope | Zonotope, direction: Sequence[float]) -> float:
    return s.support(direction)


def wrap_angle(theta: float | np.ndarray) -> float | np.ndarray:
    """Wrap angles to (-π, π]."""
    wrapped = np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2.0 * np.pi)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped
