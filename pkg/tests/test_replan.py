"""Test the re-plan path: corridor deletion cost and a closed-loop detour."""

import copy
import time

import numpy as np
import pytest

from navstack import metrics
from navstack.config import settings
from navstack.geometry import HPolytope, Point2
from navstack.harness import Outcome, Scenario, run_episode
from navstack.medial_axis import (
    Route,
    add_backtrack_edge,
    attach_endpoints,
    build_graph,
    remove_current_corridor,
    shortest_route,
    triangulate,
)


def _grid_graph(k: int):
    """Medial-axis graph of a k x k grid of square obstacles."""
    size = 2.0 * k + 1.0
    obstacles = [
        HPolytope.from_box(2 * i + 1.0, 2 * j + 1.0, 2 * i + 1.8, 2 * j + 1.8)
        for i in range(k)
        for j in range(k)
    ]
    return build_graph(triangulate(HPolytope.from_box(0.0, 0.0, size, size), obstacles)), size


def _far_apart_route(graph, size: float) -> Route:
    ids = list(graph.nodes)
    pos = np.array([graph.nodes[i].position.as_array() for i in ids])
    a = ids[int(np.argmin(pos.sum(axis=1)))]
    b = ids[int(np.argmax(pos.sum(axis=1)))]
    route = shortest_route(graph, a, b)
    assert isinstance(route, Route)
    return route


def _delete_and_search(graph, route: Route):
    leg = route.legs[len(route.legs) // 2]
    p_near = Point2.from_array(leg.points[len(leg.points) // 2])
    deletion = remove_current_corridor(graph, route, p_near)
    backtrack = add_backtrack_edge(graph, p_near, route.nodes[deletion.leg_index])
    return shortest_route(graph, backtrack, route.nodes[-1])


def test_deletion_never_triangulates():
    """Test corridor deletion and re-search reuse the existing mesh."""
    graph, size = _grid_graph(3)
    route = _far_apart_route(graph, size)
    before = metrics.sample("navstack_triangulations_total")
    result = _delete_and_search(graph, route)
    assert metrics.sample("navstack_triangulations_total") == before
    assert isinstance(result, Route)
    assert graph.is_consistent()


@pytest.mark.slow
def test_deletion_scales_near_linearly():
    """Test deletion plus re-search time grows at most like n^1.2 in the node count."""
    sizes, seconds = [], []
    for k in (2, 6, 18):
        graph, size = _grid_graph(k)
        route = _far_apart_route(graph, size)
        best = np.inf
        for _ in range(5):
            trial = copy.deepcopy(graph)
            started = time.perf_counter()
            _delete_and_search(trial, route)
            best = min(best, time.perf_counter() - started)
        sizes.append(len(graph.nodes))
        seconds.append(best)
    assert sizes == sorted(sizes)
    slope, _ = np.polyfit(np.log(sizes), np.log(seconds), 1)
    assert slope <= 1.2


@pytest.mark.slow
def test_unmapped_wall_forces_detour():
    """Test a wall in the initial corridor triggers a re-plan through the other corridor."""
    arena = HPolytope.from_box(0.0, 0.0, 6.0, 4.0)
    island = HPolytope.from_box(2.4, 1.2, 3.6, 2.8)
    start, goal = Point2(0.8, 2.0), Point2(5.2, 2.0)

    mesh = triangulate(arena, [island], max_edge=settings.boundary_max_edge)
    graph = build_graph(mesh)
    route = shortest_route(graph, *attach_endpoints(graph, mesh, start, goal))
    above = float(route.polyline[:, 1].mean()) > 2.0
    wall = (
        HPolytope.from_box(2.9, 2.8, 3.1, 4.0) if above else HPolytope.from_box(2.9, 0.0, 3.1, 1.2)
    )

    scenario = Scenario(
        seed=5, arena=arena, mapped=(island,), unmapped=(wall,), start=start, goal=goal
    )
    log = run_episode(scenario)
    assert log.outcome is Outcome.GOAL_REACHED
    assert len(log.replans) >= 1
    assert len(log.routes) >= 2
    assert min(r.clearance for r in log.telemetry) > 0.0
