"""Test free-space triangulation and convex partitioning."""

import numpy as np
import pytest

from navstack.errors import DegenerateGeometryError
from navstack.geometry import HPolytope, partition_free_space
from navstack.geometry.cdt import constrained_triangles, free_space_polygon
from navstack.geometry.partition import hertel_mehlhorn


@pytest.fixture
def box():
    return HPolytope.from_box(-2.0, -2.0, 2.0, 2.0)


def _is_convex_cell(cell: HPolytope) -> bool:
    v = cell.vertices
    edges = np.roll(v, -1, axis=0) - v
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    return bool(np.all(cross >= -1e-9))


def test_empty_obstacle_list(box):
    """Test the box itself is the only cell."""
    partition = partition_free_space(box, [])
    assert len(partition) == 1
    assert partition.area() == pytest.approx(16.0)


def test_centered_hole(box):
    """Test a square hole needs at least four cells and the areas add up."""
    hole = HPolytope.from_box(-1.0, -1.0, 1.0, 1.0)
    partition = partition_free_space(box, [hole])
    assert len(partition) >= 4
    assert partition.area() == pytest.approx(16.0 - 4.0)
    assert all(_is_convex_cell(c) for c in partition.cells)
    assert partition.locate((0.0, 0.0)) is None
    assert partition.locate((1.5, 1.5)) is not None


def test_obstacle_covering_box(box):
    """Test a covering obstacle leaves zero cells."""
    partition = partition_free_space(box, [HPolytope.from_box(-3.0, -3.0, 3.0, 3.0)])
    assert partition.is_empty()
    assert len(partition) == 0


def test_cells_have_disjoint_interiors(box):
    """Test pairwise overlaps have zero area."""
    obstacles = [
        HPolytope.from_vertices([(-1.5, -1.5), (-0.5, -1.5), (-1.0, -0.5)]),
        HPolytope.from_box(0.5, 0.0, 1.5, 1.0),
    ]
    partition = partition_free_space(box, obstacles)
    shapes = [c.to_shapely() for c in partition.cells]
    for i in range(len(shapes)):
        for j in range(i + 1, len(shapes)):
            assert shapes[i].intersection(shapes[j]).area == pytest.approx(0.0, abs=1e-9)
    free = free_space_polygon(box, obstacles)
    assert partition.to_shapely().symmetric_difference(free).area == pytest.approx(0.0, abs=1e-9)


def test_degenerate_obstacle_raises(box):
    """Test an obstacle with an empty interior is rejected."""
    sliver = HPolytope(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]), np.zeros(4))
    with pytest.raises(DegenerateGeometryError):
        partition_free_space(box, [sliver])


def test_hertel_mehlhorn_merges_square():
    """Test two triangles of a square merge into one piece."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    pieces = hertel_mehlhorn(pts, np.array([[0, 1, 2], [0, 2, 3]]))
    assert len(pieces) == 1
    assert sorted(pieces[0]) == [0, 1, 2, 3]


def test_constrained_triangles_are_ccw(box):
    """Test triangles come out counterclockwise."""
    region = free_space_polygon(box, [HPolytope.from_box(-1.0, -1.0, 1.0, 1.0)])
    vertices, triangles = constrained_triangles(region)
    a, b, c = (vertices[triangles[:, k]] for k in range(3))
    cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
    assert np.all(cross > 0)
