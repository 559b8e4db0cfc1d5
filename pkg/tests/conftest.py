"""Pytest configuration and fixtures."""

import numpy as np
import pytest

from navstack.geometry import HPolytope, Point2, partition_free_space
from navstack.harness import Scenario
from navstack.medial_axis import TriangulationMesh
from navstack.mpc import MPCConfig


@pytest.fixture
def unit_box():
    """The box [-1, 1]²."""
    return HPolytope.from_box(-1.0, -1.0, 1.0, 1.0)


@pytest.fixture
def h_mesh():
    """Strip of parallelogram triangles with one arm below triangle 2 and one above triangle 5.

    Triangles 2 and 5 are the only 3-connected ones; 3 and 4 form the corridor
    between them, 0-1 and 6-7 are dead ends, 8 and 9 are the arms.
    """
    bottom = [(float(i), 0.0) for i in range(5)]
    top = [(i + 0.3, 1.0) for i in range(5)]
    vertices = bottom + top + [(1.5, -1.0), (2.8, 2.0)]
    triangles = [
        (0, 1, 5),
        (1, 6, 5),
        (1, 2, 6),
        (2, 7, 6),
        (2, 3, 7),
        (3, 8, 7),
        (3, 4, 8),
        (4, 9, 8),
        (1, 10, 2),
        (7, 8, 11),
    ]
    return TriangulationMesh.from_triangles(vertices, triangles)


@pytest.fixture
def ring_mesh():
    """Square annulus of eight triangles with arms on triangles 0 and 3.

    The two junctions (triangles 0 and 3) are joined by two corridors,
    (1, 2) and (7, 6, 5, 4). The inner quadrilateral is skewed so no two
    circumcenters coincide.
    """
    vertices = [
        (0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0),
        (1.2, 0.9), (2.6, 1.1), (3.1, 2.8), (0.9, 3.2),
        (2.0, -1.0), (2.0, 2.5),
    ]  # fmt: skip
    triangles = [
        (0, 1, 5),
        (1, 6, 5),
        (1, 2, 6),
        (2, 7, 6),
        (2, 3, 7),
        (3, 4, 7),
        (3, 0, 4),
        (0, 5, 4),
        (0, 8, 1),
        (6, 7, 9),
    ]
    return TriangulationMesh.from_triangles(vertices, triangles)


@pytest.fixture
def small_config():
    """Short horizon so branch and bound stays small."""
    return MPCConfig(N=4, iteration_limit=500)


@pytest.fixture
def open_partition():
    """One-cell partition of the box [0, 2]²."""
    return partition_free_space(HPolytope.from_box(0.0, 0.0, 2.0, 2.0), [])


@pytest.fixture
def open_scenario():
    """4 m square with no obstacles."""
    return Scenario(
        seed=0,
        arena=HPolytope.from_box(0.0, 0.0, 4.0, 4.0),
        mapped=(),
        unmapped=(),
        start=Point2(0.5, 0.5),
        goal=Point2(3.5, 3.5),
        start_heading=float(np.pi / 4),
    )


@pytest.fixture
def walled_scenario():
    """Unmapped wall across the whole arena between start and goal."""
    wall = HPolytope.from_box(2.8, 0.0, 3.2, 3.0)
    return Scenario(
        seed=1,
        arena=HPolytope.from_box(0.0, 0.0, 6.0, 3.0),
        mapped=(),
        unmapped=(wall,),
        start=Point2(0.8, 1.5),
        goal=Point2(5.2, 1.5),
        overrides={"mpc": {"N": 6}, "episode": {"time_limit": 40.0}},
    )
