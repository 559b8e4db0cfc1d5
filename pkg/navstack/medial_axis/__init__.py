"""Approximate medial axis: triangulation, corridor graph, routing and corridor deletion."""

from .graph import (
    CorridorDeletion,
    GraphNode,
    MedialAxisGraph,
    NodeKind,
    add_backtrack_edge,
    attach_endpoints,
    attach_goal,
    backtrack_target,
    build_graph,
    reattach_goal,
    remove_current_corridor,
)
from .mesh import TriangulationMesh, nearest_circumcenter, triangulate
from .route import Chain, NoRoute, Route, RouteLeg
from .search import shortest_route

__all__ = [
    "Chain",
    "CorridorDeletion",
    "GraphNode",
    "MedialAxisGraph",
    "NoRoute",
    "NodeKind",
    "Route",
    "RouteLeg",
    "TriangulationMesh",
    "add_backtrack_edge",
    "attach_endpoints",
    "attach_goal",
    "backtrack_target",
    "build_graph",
    "nearest_circumcenter",
    "reattach_goal",
    "remove_current_corridor",
    "shortest_route",
    "triangulate",
]
