"""Prometheus collectors for the planning stack.

Counters are process-global; tests read them through ``REGISTRY`` or the
``sample`` helper.
"""

from __future__ import annotations

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Histogram, generate_latest  # type: ignore

triangulations = Counter(
    "navstack_triangulations", "Constrained Delaunay triangulations computed"
)
qp_solves = Counter("navstack_qp_solves", "Convex QP solves", ["result"])
bnb_solves = Counter("navstack_bnb_solves", "Branch-and-bound runs", ["status"])
replans = Counter("navstack_replans", "Global re-plans triggered by the MPC bound")
corridor_deletions = Counter(
    "navstack_corridor_deletions", "Corridors removed from the medial-axis graph"
)
replan_seconds = Histogram(
    "navstack_replan_seconds",
    "Wall time of corridor deletion plus re-search",
    buckets=(0.001, 0.005, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5, 1.0),
)


def sample(name: str, labels: dict[str, str] | None = None) -> float:
    """Current value of a sample, 0.0 when it has not been emitted yet."""
    value = REGISTRY.get_sample_value(name, labels or {})
    return float(value) if value is not None else 0.0


def write_metrics(path: Path) -> None:
    """Dump the text exposition format to ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(generate_latest())
