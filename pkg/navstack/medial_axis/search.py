"""A* over the corridor multigraph; edge cost is chain arc length."""

from __future__ import annotations

import math

import networkx as nx
from loguru import logger

from navstack.medial_axis.graph import MedialAxisGraph
from navstack.medial_axis.route import Chain, NoRoute, Route, RouteLeg


def _cheapest(graph: MedialAxisGraph, u: int, v: int) -> Chain:
    return min(graph.chains_between(u, v), key=lambda c: (c.length, c.id))


def shortest_route(graph: MedialAxisGraph, start: int, goal: int) -> Route | NoRoute:
    """Minimum arc-length route from ``start`` to ``goal``, or NoRoute when disconnected.

    Among parallel chains the cheapest one is used. The heuristic is the
    straight-line distance between node positions, which never overestimates a
    chain's arc length because chains end exactly at their nodes.
    """
    if start not in graph.nodes or goal not in graph.nodes:
        return NoRoute(start, goal, reason="unknown node")
    origin = graph.nodes[start].position
    if start == goal:
        return Route(legs=(), nodes=(start,), origin=origin)

    target = graph.nodes[goal].position

    def heuristic(u: int, _v: int) -> float:
        return graph.nodes[u].position.distance(target)

    def weight(_u: int, _v: int, parallel: dict) -> float:
        return min((attrs["length"] for attrs in parallel.values()), default=math.inf)

    try:
        path = nx.astar_path(graph.graph, start, goal, heuristic=heuristic, weight=weight)
    except nx.NetworkXNoPath:
        logger.info("[search] no route from node {} to node {}", start, goal)
        return NoRoute(start, goal)

    legs = tuple(RouteLeg(_cheapest(graph, u, v), u, v) for u, v in zip(path, path[1:]))
    route = Route(legs=legs, nodes=tuple(path), origin=origin)
    logger.info(
        "[search] route {} -> {} over {} chains, length {:.2f} m", start, goal, len(legs), route.cost
    )
    return route
