"""Corridor graph over circumcenters of 3-connected triangles.

Nodes are junction triangles; every edge of the underlying ``networkx.MultiGraph``
is one triangle chain (keyed by chain id), so parallel corridors between the
same pair of junctions stay distinct. Endpoint and backtrack nodes are
temporary and can be purged without touching the persistent graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Iterable, Sequence

import networkx as nx
import numpy as np
import scipy.sparse as sp
from loguru import logger
from scipy.sparse.csgraph import breadth_first_order

from navstack import metrics
from navstack.errors import BacktrackError, CorridorNotFoundError
from navstack.geometry.sets import Point2
from navstack.medial_axis.mesh import TriangulationMesh, nearest_circumcenter
from navstack.medial_axis.route import Chain, Route


class NodeKind(str, Enum):
    JUNCTION = "junction"
    ENDPOINT = "endpoint"
    BACKTRACK = "backtrack"


@dataclass(frozen=True)
class GraphNode:
    id: int
    position: Point2
    triangle: int
    kind: NodeKind

    @property
    def temporary(self) -> bool:
        return self.kind is not NodeKind.JUNCTION


@dataclass(frozen=True)
class CorridorDeletion:
    """Result of removing the occupied corridor: which route leg matched and what went."""

    leg_index: int
    removed: tuple[int, ...]
    # Junction ends of the deleted persistent corridors.
    exits: tuple[int, ...] = ()


class MedialAxisGraph:
    def __init__(self, mesh: TriangulationMesh):
        self.mesh = mesh
        self.graph = nx.MultiGraph()
        self.nodes: dict[int, GraphNode] = {}
        self.chains: dict[int, Chain] = {}
        self.removed_chains: list[int] = []
        self.backtrack_node: int | None = None
        self._backtrack_target: int | None = None
        self._junction_at: dict[int, int] = {}
        self._corridor_of: dict[int, int] = {}
        self._removed_triangles: set[int] = set()
        self._next_node = 0
        self._next_chain = 0

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------

    @property
    def junctions(self) -> list[int]:
        return [n for n, node in self.nodes.items() if not node.temporary]

    @property
    def temporaries(self) -> list[int]:
        return [n for n, node in self.nodes.items() if node.temporary]

    @property
    def node_triangle(self) -> dict[int, int]:
        return {n: node.triangle for n, node in self.nodes.items()}

    def junction_at(self, triangle: int) -> int | None:
        return self._junction_at.get(triangle)

    def chains_between(self, i: int, j: int) -> list[Chain]:
        if not self.graph.has_edge(i, j):
            return []
        return [self.chains[k] for k in sorted(self.graph[i][j])]

    def adjacency_matrix(self, nodes: Sequence[int] | None = None) -> np.ndarray:
        """Boolean adjacency over ``nodes`` (all current nodes in id order by default)."""
        order = sorted(self.nodes) if nodes is None else list(nodes)
        pos = {n: k for k, n in enumerate(order)}
        A = np.zeros((len(order), len(order)), dtype=bool)
        for u, v in self.graph.edges():
            if u in pos and v in pos:
                A[pos[u], pos[v]] = A[pos[v], pos[u]] = True
        return A

    def is_consistent(self) -> bool:
        for u, v, key in self.graph.edges(keys=True):
            chain = self.chains.get(key)
            if chain is None or set(chain.ends) != {u, v} or u == v:
                return False
        return len(self.chains) == self.graph.number_of_edges()

    # ------------------------------------------------------------------
    # Mutation primitives
    # ------------------------------------------------------------------

    def add_node(self, position: Point2, triangle: int, kind: NodeKind) -> int:
        nid = self._next_node
        self._next_node += 1
        self.nodes[nid] = GraphNode(nid, position, triangle, kind)
        self.graph.add_node(nid)
        if kind is NodeKind.JUNCTION:
            self._junction_at[triangle] = nid
        return nid

    def add_chain(
        self,
        ends: tuple[int, int],
        triangles: Sequence[int],
        points: np.ndarray,
        temporary: bool = False,
        parent: int | None = None,
    ) -> Chain:
        chain = Chain(self._next_chain, ends, tuple(triangles), points, temporary, parent)
        self._next_chain += 1
        self.chains[chain.id] = chain
        self.graph.add_edge(ends[0], ends[1], key=chain.id, length=chain.length)
        if not temporary:
            for t in chain.triangles[1:-1]:
                self._corridor_of[t] = chain.id
        return chain

    def remove_chain(self, chain_id: int) -> Chain:
        """Remove one chain; a persistent corridor takes its temporary attachment chains along."""
        chain = self.chains.pop(chain_id)
        self.graph.remove_edge(chain.ends[0], chain.ends[1], key=chain_id)
        if not chain.temporary:
            self._removed_triangles.update(chain.triangles[1:-1])
            self.removed_chains.append(chain_id)
            children = [c.id for c in self.chains.values() if c.temporary and c.parent == chain_id]
            for cid in children:
                self.remove_chain(cid)
            if children:
                logger.debug("[graph] chain {} dropped attachment chains {}", chain_id, children)
        return chain

    def remove_node(self, node_id: int) -> None:
        for _, _, key in list(self.graph.edges(node_id, keys=True)):
            if key in self.chains:
                self.remove_chain(key)
        self.graph.remove_node(node_id)
        node = self.nodes.pop(node_id)
        if node.kind is NodeKind.JUNCTION:
            self._junction_at.pop(node.triangle, None)
        if node_id == self.backtrack_node:
            self.backtrack_node = self._backtrack_target = None

    def purge_temporary(self, keep: Iterable[int] = ()) -> None:
        """Drop temporary nodes (and their chains) not listed in ``keep``."""
        keep = set(keep)
        for nid in self.temporaries:
            if nid not in keep:
                self.remove_node(nid)

    def corridor_of(self, triangle: int) -> int | None:
        cid = self._corridor_of.get(triangle)
        return cid if cid in self.chains else None

    def dump(self) -> dict[str, Any]:
        """JSON-compatible snapshot for debugging."""
        return {
            "nodes": [
                {
                    "id": n.id,
                    "x": n.position.x,
                    "y": n.position.y,
                    "triangle": n.triangle,
                    "kind": n.kind.value,
                }
                for n in self.nodes.values()
            ],
            "adjacency": [list(e) for e in sorted({(min(u, v), max(u, v)) for u, v in self.graph.edges()})],
            "chains": [
                {
                    "id": c.id,
                    "ends": list(c.ends),
                    "temporary": c.temporary,
                    "parent": c.parent,
                    "length": c.length,
                    "points": c.points.tolist(),
                }
                for c in self.chains.values()
            ],
            "removed_chains": list(self.removed_chains),
        }


# ---------------------------------------------------------------------------
# Walking the mesh
# ---------------------------------------------------------------------------


def _walk(
    mesh: TriangulationMesh,
    origin: int,
    first: int,
    is_end: Callable[[int], bool],
    blocked: set[int] | frozenset[int] = frozenset(),
) -> list[int] | None:
    """Follow 2-connected triangles from ``origin`` through ``first`` until ``is_end``.

    Returns the triangle sequence (both ends included), or None on a dead end,
    a blocked triangle or a loop.
    """
    seq = [origin]
    prev, cur = origin, first
    for _ in range(mesh.n_triangles):
        if cur in blocked:
            return None
        seq.append(cur)
        if is_end(cur):
            return seq
        nbrs = mesh.neighbors[cur]
        if len(nbrs) != 2:
            return None
        prev, cur = cur, nbrs[0] if nbrs[1] == prev else nbrs[1]
    return None


def build_graph(mesh: TriangulationMesh) -> MedialAxisGraph:
    """Junction nodes plus one chain per 2-connected corridor between them."""
    graph = MedialAxisGraph(mesh)
    for t in range(mesh.n_triangles):
        if mesh.degree(t) == 3:
            graph.add_node(mesh.circumcenter(t), t, NodeKind.JUNCTION)

    seen: set[tuple[int, ...]] = set()
    loops = 0
    for node_id in graph.junctions:
        t = graph.nodes[node_id].triangle
        for nb in mesh.neighbors[t]:
            seq = _walk(mesh, t, nb, lambda c: graph.junction_at(c) is not None)
            if seq is None:
                continue
            key = min(tuple(seq), tuple(reversed(seq)))
            if key in seen:
                continue
            seen.add(key)
            a, b = graph.junction_at(seq[0]), graph.junction_at(seq[-1])
            if a == b:
                loops += 1
                logger.warning(
                    "[graph] dropped self-loop corridor at junction {} ({} triangles)", a, len(seq) - 2
                )
                continue
            graph.add_chain((a, b), seq, mesh.circumcenters[seq])

    logger.info(
        "[graph] {} nodes, {} chains ({} self-loops dropped)",
        len(graph.nodes),
        len(graph.chains),
        loops,
    )
    return graph


def _attach(
    graph: MedialAxisGraph,
    mesh: TriangulationMesh,
    p: Point2,
    other: int | None = None,
) -> int:
    _, t = nearest_circumcenter(mesh, p)
    nid = graph.add_node(p, t, NodeKind.ENDPOINT)
    parent = graph.corridor_of(t)
    cc = mesh.circumcenters
    other_node = graph.nodes[other] if other is not None else None
    other_tri = other_node.triangle if other_node is not None else None

    junction = graph.junction_at(t)
    if junction is not None:
        graph.add_chain((nid, junction), (t,), np.vstack([p.as_array(), cc[t]]), temporary=True)
        return nid

    if other_node is not None and other_tri == t:
        pts = np.vstack([p.as_array(), cc[t], other_node.position.as_array()])
        graph.add_chain((nid, other), (t,), pts, temporary=True, parent=parent)

    def is_end(c: int) -> bool:
        return graph.junction_at(c) is not None or c == other_tri

    for nb in mesh.neighbors[t]:
        seq = _walk(mesh, t, nb, is_end, graph._removed_triangles)
        if seq is None:
            continue
        end = seq[-1]
        pts = np.vstack([p.as_array(), cc[seq]])
        target = graph.junction_at(end)
        if target is None:
            target = other
            pts = np.vstack([pts, other_node.position.as_array()])
        graph.add_chain((nid, target), seq, pts, temporary=True, parent=parent)
    return nid


def attach_endpoints(
    graph: MedialAxisGraph, mesh: TriangulationMesh, start: Point2, goal: Point2
) -> tuple[int, int]:
    """Add temporary start and goal nodes wired along the circumcenter sequence."""
    start_id = _attach(graph, mesh, start)
    goal_id = _attach(graph, mesh, goal, other=start_id)
    logger.debug(
        "[graph] attached start={} ({} chains) goal={} ({} chains)",
        start_id,
        graph.graph.degree(start_id),
        goal_id,
        graph.graph.degree(goal_id),
    )
    return start_id, goal_id


def attach_goal(graph: MedialAxisGraph, mesh: TriangulationMesh, goal: Point2, start: int) -> int:
    """Attach only a goal node, allowing a direct chain to the existing ``start`` node."""
    return _attach(graph, mesh, goal, other=start)


# ---------------------------------------------------------------------------
# Re-planning mutations
# ---------------------------------------------------------------------------


def remove_current_corridor(
    graph: MedialAxisGraph, route: Route, p_near: Point2, tol: float = 1e-9
) -> CorridorDeletion:
    """Delete the route chain that contains ``p_near``; no re-triangulation happens.

    Interior matches win over endpoint matches; at a shared joint the outgoing
    leg is taken. A temporary attachment chain takes its parent corridor with it.
    """
    interior = outgoing = incoming = None
    for i, leg in enumerate(route.legs):
        if leg.chain.id not in graph.chains:
            continue
        pts = leg.points
        k = leg.chain.locate(p_near, tol)
        if k is None:
            continue
        k = k if leg.chain.ends[0] == leg.src else len(pts) - 1 - k
        if 0 < k < len(pts) - 1:
            interior = i
            break
        if k == 0 and outgoing is None:
            outgoing = i
        elif k == len(pts) - 1 and incoming is None:
            incoming = i
    index = next((i for i in (interior, outgoing, incoming) if i is not None), None)
    if index is None:
        raise CorridorNotFoundError(f"({p_near.x:.3f}, {p_near.y:.3f}) lies on no chain of the route")

    chain = route.legs[index].chain
    doomed = [chain.id]
    if chain.parent is not None and chain.parent in graph.chains:
        doomed.append(chain.parent)
    before = set(graph.chains)
    exits: list[int] = []
    for cid in doomed:
        if cid in graph.chains:
            gone = graph.remove_chain(cid)
            if not gone.temporary:
                exits.extend(n for n in gone.ends if n not in exits)
    removed = tuple(doomed + sorted(before - set(graph.chains) - set(doomed)))
    metrics.corridor_deletions.inc(len(removed))
    logger.info("[graph] removed corridor chains {} (route leg {})", list(removed), index)
    return CorridorDeletion(leg_index=index, removed=removed, exits=tuple(exits))


def backtrack_target(graph: MedialAxisGraph, route: Route, deletion: CorridorDeletion) -> int:
    """Node the vehicle backs up to after ``deletion``.

    Normally the source node of the deleted leg. When that node lost every chain
    (an endpoint attached inside the deleted corridor) the far exit of the
    corridor is used instead, so the vehicle backs out past the endpoint.
    """
    last_node = route.nodes[deletion.leg_index]
    if last_node in graph.nodes and graph.graph.degree(last_node) > 0:
        return last_node
    blocked_end = route.nodes[deletion.leg_index + 1]
    for node in deletion.exits:
        if node != blocked_end and node in graph.nodes:
            logger.info("[graph] node {} is cut off; backing up to corridor exit {}", last_node, node)
            return node
    return last_node


def reattach_goal(graph: MedialAxisGraph, mesh: TriangulationMesh, goal_id: int, goal: Point2) -> int:
    """Replace a goal node that lost every chain with a fresh attachment.

    The new chains never walk through triangles of deleted corridors, so the
    node may stay isolated.
    """
    if goal_id in graph.nodes:
        graph.remove_node(goal_id)
    nid = _attach(graph, mesh, goal)
    logger.info("[graph] re-attached goal as node {} ({} chains)", nid, graph.graph.degree(nid))
    return nid


def _triangle_path(
    graph: MedialAxisGraph,
    mesh: TriangulationMesh,
    source: int,
    target: int,
    avoid_junctions: bool = True,
) -> list[int] | None:
    """Fewest-hop triangle path; by default it crosses no junction other than ``target``."""
    if source == target:
        return [source]
    passable = np.ones(mesh.n_triangles)
    if avoid_junctions:
        for t in graph._junction_at:
            passable[t] = 0.0
    passable[source] = passable[target] = 1.0
    mask = sp.diags(passable)
    adjacency = (mask @ mesh.adjacency @ mask).tocsr()
    _, pred = breadth_first_order(adjacency, source, directed=False, return_predecessors=True)
    if pred[target] < 0:
        return None
    path = [target]
    while path[-1] != source:
        path.append(int(pred[path[-1]]))
    return path[::-1]


def add_backtrack_edge(graph: MedialAxisGraph, q_veh: Point2, last_node: int) -> int:
    """Insert a temporary node at ``q_veh`` with a chain back to ``last_node``.

    Only one backtrack node exists at a time: the previous one is removed, and
    when it is itself ``last_node`` the new chain leads to its target instead.
    """
    if last_node not in graph.nodes:
        raise BacktrackError(f"node {last_node} is not in the graph")
    mesh = graph.mesh
    target = last_node
    if graph.backtrack_node is not None:
        if last_node == graph.backtrack_node and graph._backtrack_target is not None:
            target = graph._backtrack_target
        graph.remove_node(graph.backtrack_node)
    if target not in graph.nodes:
        raise BacktrackError(f"backtrack target {target} is no longer in the graph")

    _, t_q = nearest_circumcenter(mesh, q_veh)
    goal = graph.nodes[target]
    path = _triangle_path(graph, mesh, t_q, goal.triangle) or _triangle_path(
        graph, mesh, t_q, goal.triangle, avoid_junctions=False
    )
    if path is None:
        raise BacktrackError(f"node {target} is unreachable from ({q_veh.x:.3f}, {q_veh.y:.3f})")

    pts = np.vstack([q_veh.as_array(), mesh.circumcenters[path]])
    if np.hypot(*(pts[-1] - goal.position.as_array())) > 0.0:
        pts = np.vstack([pts, goal.position.as_array()])
    nid = graph.add_node(q_veh, t_q, NodeKind.BACKTRACK)
    graph.add_chain((nid, target), path, pts, temporary=True)
    graph.backtrack_node, graph._backtrack_target = nid, target
    logger.info("[graph] backtrack node {} -> node {} over {} triangles", nid, target, len(path))
    return nid
