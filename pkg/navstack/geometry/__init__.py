"""Convex sets, obstacle bloating and free-space partitioning."""

from .partition import ConvexPartition, partition_free_space
from .sets import (
    HPolytope,
    Point2,
    Zonotope,
    bloat,
    contains,
    minkowski_sum,
    regular_hexagon,
    support,
    wrap_angle,
)

__all__ = [
    "ConvexPartition",
    "HPolytope",
    "Point2",
    "Zonotope",
    "bloat",
    "contains",
    "minkowski_sum",
    "partition_free_space",
    "regular_hexagon",
    "support",
    "wrap_angle",
]
