"""Test shortest routes over the corridor graph."""

import numpy as np
import pytest

from navstack.medial_axis import NoRoute, build_graph, remove_current_corridor, shortest_route


def test_start_equals_goal(h_mesh):
    """Test a trivial route has no legs and zero cost."""
    graph = build_graph(h_mesh)
    route = shortest_route(graph, 0, 0)
    assert route.legs == ()
    assert route.cost == 0.0
    assert route.polyline.shape == (1, 2)


def test_picks_shorter_parallel_corridor(ring_mesh):
    """Test the cheaper of two parallel chains is used."""
    graph = build_graph(ring_mesh)
    shortest = min(graph.chains_between(0, 1), key=lambda c: c.length)
    route = shortest_route(graph, 0, 1)
    assert route.chain_ids() == [shortest.id]
    assert route.cost == pytest.approx(shortest.length)


def test_polyline_starts_and_ends_at_nodes(ring_mesh):
    """Test the waypoints run from the start node to the goal node."""
    graph = build_graph(ring_mesh)
    route = shortest_route(graph, 1, 0)
    np.testing.assert_allclose(route.polyline[0], graph.nodes[1].position.as_array())
    np.testing.assert_allclose(route.polyline[-1], graph.nodes[0].position.as_array())
    assert route.export()["chains"] == route.chain_ids()


def test_disconnected_after_bridge_deletion(h_mesh):
    """Test removing the only corridor leaves no route."""
    graph = build_graph(h_mesh)
    route = shortest_route(graph, 0, 1)
    remove_current_corridor(graph, route, h_mesh.circumcenter(4))
    result = shortest_route(graph, 0, 1)
    assert isinstance(result, NoRoute)
    assert result.reason == "disconnected"


def test_unknown_node(h_mesh):
    """Test missing nodes report NoRoute instead of raising."""
    graph = build_graph(h_mesh)
    assert isinstance(shortest_route(graph, 0, 99), NoRoute)


def test_route_never_uses_deleted_chain(ring_mesh):
    """Test the re-search only sees remaining chains."""
    graph = build_graph(ring_mesh)
    route = shortest_route(graph, 0, 1)
    deletion = remove_current_corridor(graph, route, route.waypoints()[1])
    again = shortest_route(graph, 0, 1)
    assert not set(deletion.removed) & set(again.chain_ids())
    assert again.cost >= route.cost
