"""Test the corridor graph, endpoint attachment, corridor deletion and backtracking."""

import json

import pytest
from loguru import logger

from navstack.errors import BacktrackError, CorridorNotFoundError
from navstack.geometry import Point2
from navstack.medial_axis import (
    NoRoute,
    NodeKind,
    TriangulationMesh,
    add_backtrack_edge,
    attach_endpoints,
    attach_goal,
    backtrack_target,
    build_graph,
    reattach_goal,
    remove_current_corridor,
    shortest_route,
)


def test_h_mesh_graph(h_mesh):
    """Test two junctions joined by one chain of four circumcenters."""
    graph = build_graph(h_mesh)
    assert len(graph.nodes) == 2
    assert len(graph.chains) == 1
    chain = next(iter(graph.chains.values()))
    assert chain.triangles in ((2, 3, 4, 5), (5, 4, 3, 2))
    assert len(chain.points) == 4
    assert graph.adjacency_matrix()[0, 1]
    assert graph.is_consistent()
    assert graph.node_triangle == {0: 2, 1: 5}


def test_parallel_corridors(ring_mesh):
    """Test both corridors between the same junctions are kept."""
    graph = build_graph(ring_mesh)
    assert len(graph.nodes) == 2
    chains = graph.chains_between(0, 1)
    assert len(chains) == 2
    assert {c.triangles[1:-1] for c in chains} == {(1, 2), (7, 6, 5, 4)}
    assert graph.adjacency_matrix()[0, 1]
    assert graph.is_consistent()


def test_no_junctions():
    """Test a mesh without 3-connected triangles yields an empty graph."""
    mesh = TriangulationMesh.from_triangles([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
    graph = build_graph(mesh)
    assert graph.nodes == {}
    assert graph.chains == {}


def test_attach_on_existing_node(h_mesh):
    """Test a start on a junction gets one zero-length chain."""
    graph = build_graph(h_mesh)
    start, _ = attach_endpoints(graph, h_mesh, h_mesh.circumcenter(2), h_mesh.circumcenter(5))
    assert graph.nodes[start].kind is NodeKind.ENDPOINT
    assert graph.graph.degree(start) == 1
    [(_, junction, key)] = list(graph.graph.edges(start, keys=True))
    assert junction == 0
    assert graph.chains[key].length == 0.0


def test_attach_mid_corridor(h_mesh):
    """Test a start inside the corridor connects to both of its junctions."""
    graph = build_graph(h_mesh)
    start, _ = attach_endpoints(graph, h_mesh, h_mesh.circumcenter(3), h_mesh.circumcenter(7))
    assert sorted(v for _, v in graph.graph.edges(start)) == [0, 1]
    assert all(graph.chains[k].parent is not None for _, _, k in graph.graph.edges(start, keys=True))


def test_attach_goal_in_dead_end(h_mesh):
    """Test a goal in a dead end connects only to the junction at its mouth."""
    graph = build_graph(h_mesh)
    _, goal = attach_endpoints(graph, h_mesh, h_mesh.circumcenter(3), h_mesh.circumcenter(0))
    assert [v for _, v in graph.graph.edges(goal)] == [0]


def test_attach_without_junctions():
    """Test start and goal connect directly when the mesh has no junctions."""
    mesh = TriangulationMesh.from_triangles([(0, 0), (1, 0), (1, 1), (0, 1)], [(0, 1, 2), (0, 2, 3)])
    graph = build_graph(mesh)
    start, goal = attach_endpoints(graph, mesh, Point2(0.8, 0.2), Point2(0.2, 0.8))
    route = shortest_route(graph, start, goal)
    assert route.nodes == (start, goal)


def test_purge_temporary(h_mesh):
    """Test temporary nodes and their chains go away."""
    graph = build_graph(h_mesh)
    attach_endpoints(graph, h_mesh, h_mesh.circumcenter(3), h_mesh.circumcenter(0))
    graph.purge_temporary()
    assert graph.temporaries == []
    assert len(graph.chains) == 1
    assert graph.is_consistent()


def test_delete_one_of_two_parallel_corridors(ring_mesh):
    """Test the adjacency survives while a parallel chain remains."""
    graph = build_graph(ring_mesh)
    route = shortest_route(graph, 0, 1)
    used = route.chain_ids()[0]
    deletion = remove_current_corridor(graph, route, Point2.from_array(route.legs[0].points[1]))
    assert deletion.removed == (used,)
    assert deletion.leg_index == 0
    assert graph.adjacency_matrix()[0, 1]
    again = shortest_route(graph, 0, 1)
    assert used not in again.chain_ids()


def test_delete_only_corridor(h_mesh):
    """Test removing a single-chain edge clears the adjacency and disconnects the nodes."""
    graph = build_graph(h_mesh)
    route = shortest_route(graph, 0, 1)
    remove_current_corridor(graph, route, h_mesh.circumcenter(3))
    assert not graph.adjacency_matrix()[0, 1]
    assert graph.removed_chains == route.chain_ids()


def test_delete_off_route_raises(h_mesh):
    """Test p_near away from every route chain is a caller error."""
    graph = build_graph(h_mesh)
    route = shortest_route(graph, 0, 1)
    with pytest.raises(CorridorNotFoundError):
        remove_current_corridor(graph, route, Point2(100.0, 100.0))


def test_delete_takes_parent_corridor(h_mesh):
    """Test deleting an attachment chain removes its corridor and the sibling attachment."""
    graph = build_graph(h_mesh)
    start, goal = attach_endpoints(graph, h_mesh, h_mesh.circumcenter(3), h_mesh.circumcenter(0))
    route = shortest_route(graph, start, goal)
    deletion = remove_current_corridor(graph, route, h_mesh.circumcenter(3))
    assert len(deletion.removed) == 3
    assert graph.graph.degree(start) == 0
    assert not graph.adjacency_matrix([0, 1])[0, 1]


def test_backtrack_at_last_node(h_mesh):
    """Test a vehicle on the node gets a zero-length backtrack chain."""
    graph = build_graph(h_mesh)
    node = add_backtrack_edge(graph, graph.nodes[0].position, 0)
    [(_, target, key)] = list(graph.graph.edges(node, keys=True))
    assert target == 0
    assert graph.chains[key].length == pytest.approx(0.0)


def test_backtrack_mid_corridor(ring_mesh):
    """Test the new route leaves through the corridor entrance and takes the other corridor."""
    graph = build_graph(ring_mesh)
    route = shortest_route(graph, 0, 1)
    used = route.legs[0].chain
    other = next(c for c in graph.chains_between(0, 1) if c.id != used.id)
    entrance = used.triangles[1] if used.triangles[0] == 0 else used.triangles[-2]
    q = ring_mesh.circumcenter(entrance)
    deletion = remove_current_corridor(graph, route, q)
    backtrack = add_backtrack_edge(graph, q, route.nodes[deletion.leg_index])
    detour = shortest_route(graph, backtrack, 1)
    assert detour.nodes == (backtrack, 0, 1)
    assert detour.legs[0].chain.triangles == (entrance, 0)
    assert detour.legs[1].chain is other


def test_single_backtrack_node(h_mesh):
    """Test successive backtracks keep one temporary node."""
    graph = build_graph(h_mesh)
    first = add_backtrack_edge(graph, h_mesh.circumcenter(3), 0)
    second = add_backtrack_edge(graph, h_mesh.circumcenter(4), 1)
    assert first not in graph.nodes
    assert graph.temporaries == [second]
    assert graph.is_consistent()


def test_backtrack_from_backtrack_node(h_mesh):
    """Test a backtrack from the backtrack node leads to that node's target."""
    graph = build_graph(h_mesh)
    first = add_backtrack_edge(graph, h_mesh.circumcenter(3), 0)
    second = add_backtrack_edge(graph, h_mesh.circumcenter(4), first)
    assert [v for _, v in graph.graph.edges(second)] == [0]


def test_backtrack_unknown_node(h_mesh):
    """Test an unknown target raises."""
    graph = build_graph(h_mesh)
    with pytest.raises(BacktrackError):
        add_backtrack_edge(graph, h_mesh.circumcenter(3), 42)


def test_attach_goal_to_existing_start(h_mesh):
    """Test a goal attached on its own routes from a junction."""
    graph = build_graph(h_mesh)
    goal = attach_goal(graph, h_mesh, h_mesh.circumcenter(7), 0)
    route = shortest_route(graph, 0, goal)
    assert route.nodes[0] == 0
    assert route.nodes[-1] == goal
    assert graph.nodes[goal].kind is NodeKind.ENDPOINT


def test_dump_is_json_compatible(h_mesh):
    """Test the snapshot serializes and lists both junctions."""
    graph = build_graph(h_mesh)
    snapshot = json.loads(json.dumps(graph.dump()))
    assert [n["id"] for n in snapshot["nodes"]] == [0, 1]
    assert snapshot["adjacency"] == [[0, 1]]
    assert len(snapshot["chains"]) == 1


def test_deleted_corridor_takes_attachment_chains(ring_mesh):
    """Test no attachment along a deleted corridor survives, so search never reuses it."""
    graph = build_graph(ring_mesh)
    start, goal = attach_endpoints(graph, ring_mesh, ring_mesh.circumcenter(5), ring_mesh.circumcenter(8))
    corridor = graph.corridor_of(5)
    route = shortest_route(graph, start, goal)
    deletion = remove_current_corridor(graph, route, ring_mesh.circumcenter(5))
    assert corridor in deletion.removed
    assert not any(c.parent == corridor for c in graph.chains.values())
    assert graph.graph.degree(start) == 0
    detour = shortest_route(graph, graph.junction_at(3), graph.junction_at(0))
    for leg in detour.legs:
        assert not {4, 5, 6, 7} & set(leg.chain.triangles)


def test_reattach_goal_after_its_corridor_is_deleted(h_mesh):
    """Test a goal cut off with its corridor is re-attached only through surviving triangles."""
    graph = build_graph(h_mesh)
    start, goal = attach_endpoints(graph, h_mesh, h_mesh.circumcenter(0), h_mesh.circumcenter(4))
    route = shortest_route(graph, start, goal)
    remove_current_corridor(graph, route, h_mesh.circumcenter(4))
    assert graph.graph.degree(goal) == 0

    new_goal = reattach_goal(graph, h_mesh, goal, h_mesh.circumcenter(4))
    assert goal not in graph.nodes
    [(_, target, key)] = list(graph.graph.edges(new_goal, keys=True))
    assert target == graph.junction_at(5)
    assert graph.chains[key].triangles == (4, 5)
    assert isinstance(shortest_route(graph, graph.junction_at(2), new_goal), NoRoute)


def test_self_loop_corridor_is_reported():
    """Test a corridor leaving and re-entering the same junction is logged as dropped."""
    vertices = [
        (0.0, 0.0), (4.0, 0.0), (4.0, 4.0), (0.0, 4.0),
        (1.2, 0.9), (2.6, 1.1), (3.1, 2.8), (0.9, 3.2),
        (2.0, -1.0),
    ]  # fmt: skip
    triangles = [
        (0, 1, 5), (1, 6, 5), (1, 2, 6), (2, 7, 6),
        (2, 3, 7), (3, 4, 7), (3, 0, 4), (0, 5, 4),
        (0, 8, 1),
    ]  # fmt: skip
    mesh = TriangulationMesh.from_triangles(vertices, triangles)
    messages: list[str] = []
    handler = logger.add(messages.append, level="WARNING", format="{message}")
    try:
        graph = build_graph(mesh)
    finally:
        logger.remove(handler)
    assert len(graph.nodes) == 1
    assert graph.chains == {}
    assert sum("self-loop" in m for m in messages) == 1


def test_backtrack_past_cut_off_start(h_mesh):
    """Test a start cut off with its corridor hands the backtrack to the corridor's far exit."""
    graph = build_graph(h_mesh)
    start, goal = attach_endpoints(graph, h_mesh, h_mesh.circumcenter(3), h_mesh.circumcenter(0))
    route = shortest_route(graph, start, goal)
    deletion = remove_current_corridor(graph, route, h_mesh.circumcenter(3))
    assert set(deletion.exits) == {graph.junction_at(2), graph.junction_at(5)}
    assert backtrack_target(graph, route, deletion) == graph.junction_at(5)


def test_backtrack_to_junction_with_chains_left(ring_mesh):
    """Test a source node that keeps other chains is its own backtrack target."""
    graph = build_graph(ring_mesh)
    route = shortest_route(graph, 0, 1)
    deletion = remove_current_corridor(graph, route, Point2.from_array(route.legs[0].points[1]))
    assert backtrack_target(graph, route, deletion) == 0
