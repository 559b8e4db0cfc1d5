"""Local free-space extraction around the vehicle for the MPC."""

from __future__ import annotations

import numpy as np
from loguru import logger

from navstack.config import settings
from navstack.geometry.partition import ConvexPartition, partition_free_space
from navstack.geometry.sets import HPolytope, Point2, bloat
from navstack.harness.scenario import Scenario
from navstack.mpc.config import MPCConfig


def local_box(arena: HPolytope, center: Point2, size: float | None = None) -> HPolytope:
    """Axis-aligned ``size`` x ``size`` box around ``center`` clipped to the arena bounds."""
    size = settings.local_map_size if size is None else size
    half = size / 2.0
    xmin, ymin, xmax, ymax = arena.bounds()
    return HPolytope.from_box(
        max(center.x - half, xmin),
        max(center.y - half, ymin),
        min(center.x + half, xmax),
        min(center.y + half, ymax),
    )


def clip(obstacle: HPolytope, box: HPolytope) -> HPolytope | None:
    """Intersection of two convex sets, or None when it has no interior."""
    both = HPolytope(
        np.vstack([obstacle.normals, box.normals]), np.concatenate([obstacle.offsets, box.offsets])
    )
    if both.area() <= settings.geometry_tol:
        return None
    return HPolytope.from_vertices(both.vertices)


def local_map(
    scenario: Scenario,
    q_veh: Point2,
    margin: float | None = None,
    center: Point2 | None = None,
    size: float | None = None,
) -> tuple[ConvexPartition, HPolytope]:
    """Convex partition of the local box minus every bloated obstacle that reaches into it.

    Mapped and unmapped obstacles both count. The box is centered on ``center``
    (``q_veh`` by default) and the default margin is the MPC bloat margin.
    Returns the partition together with the box it covers.
    """
    margin = MPCConfig().bloat_margin if margin is None else margin
    box = local_box(scenario.arena, center or q_veh, size)
    clipped = [
        c for c in (clip(bloat(obs, margin), box) for obs in scenario.obstacles) if c is not None
    ]
    partition = partition_free_space(box, clipped)
    logger.debug(
        "[local_map] box around ({:.2f}, {:.2f}): {} obstacles, {} cells",
        q_veh.x,
        q_veh.y,
        len(clipped),
        len(partition),
    )
    return partition, box
