"""SVG plots of episodes: arena, obstacles, medial axis, routes, trajectory, re-plans."""

from __future__ import annotations

from pathlib import Path

from loguru import logger
from matplotlib.figure import Figure
from matplotlib.patches import Polygon as PolygonPatch

from navstack.config import settings
from navstack.errors import PlotError
from navstack.harness.episode import EpisodeLog
from navstack.harness.scenario import Scenario
from navstack.medial_axis import build_graph, triangulate

_MAPPED = "#424242"
_UNMAPPED = "#E57373"
_AXIS = "#90CAF9"
_ROUTE = "#FFB300"
_TRAJECTORY = "#1E88E5"
_REPLAN = "#D32F2F"
_MAX_PANELS = 6


def _draw_map(ax, scenario: Scenario, medial_axis: bool, max_edge: float | None) -> None:
    xmin, ymin, xmax, ymax = scenario.arena.bounds()
    ax.plot(
        [xmin, xmax, xmax, xmin, xmin], [ymin, ymin, ymax, ymax, ymin], color="black", lw=1.0, gid="arena"
    )
    for poly, color, gid in [(p, _MAPPED, "mapped") for p in scenario.mapped] + [
        (p, _UNMAPPED, "unmapped") for p in scenario.unmapped
    ]:
        ax.add_patch(PolygonPatch(poly.vertices, closed=True, color=color, alpha=0.85, gid=gid))
    if medial_axis and scenario.mapped:
        graph = build_graph(triangulate(scenario.arena, scenario.mapped, max_edge=max_edge))
        for chain in graph.chains.values():
            ax.plot(chain.points[:, 0], chain.points[:, 1], color=_AXIS, lw=0.8, gid="medial-axis")
    ax.plot(scenario.start.x, scenario.start.y, "s", color="#43A047", ms=8, gid="start")
    ax.plot(scenario.goal.x, scenario.goal.y, "*", color="#43A047", ms=12, gid="goal")
    ax.set_xlim(xmin - 0.2, xmax + 0.2)
    ax.set_ylim(ymin - 0.2, ymax + 0.2)
    ax.set_aspect("equal")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")


def build_figure(
    log: EpisodeLog,
    scenario: Scenario,
    medial_axis: bool = True,
    max_edge: float | None = None,
) -> Figure:
    """Overview figure; artists carry ``gid`` labels (trajectory, replan, route-v<n>, ...)."""
    max_edge = settings.boundary_max_edge if max_edge is None else max_edge
    fig = Figure(figsize=(8, 8))
    ax = fig.subplots()
    _draw_map(ax, scenario, medial_axis, max_edge)

    for route in log.routes:
        xs, ys = zip(*route.waypoints)
        ax.plot(xs, ys, "--", color=_ROUTE, lw=1.2, gid=f"route-v{route.version}")

    frame = log.telemetry_frame()
    if len(frame):
        ax.plot(frame["x"], frame["y"], color=_TRAJECTORY, lw=1.6, gid="trajectory")
        for event in log.replans:
            row = frame.iloc[(frame["t"] - event.t).abs().argmin()]
            ax.plot(row["x"], row["y"], "x", color=_REPLAN, ms=10, mew=2, gid="replan")

    outcome = log.outcome.value if log.outcome else "no outcome"
    ax.set_title(f"seed {scenario.seed}: {outcome}, {len(log.replans)} re-plans")
    fig.tight_layout()
    return fig


def build_route_panels(log: EpisodeLog, scenario: Scenario, max_edge: float | None = None) -> Figure:
    """One panel per route version with the trajectory driven up to its replacement."""
    max_edge = settings.boundary_max_edge if max_edge is None else max_edge
    routes = log.routes[:_MAX_PANELS] or [None]
    fig = Figure(figsize=(5 * len(routes), 5))
    axes = fig.subplots(1, len(routes), squeeze=False)
    frame = log.telemetry_frame()
    ends = [r.t for r in log.routes[1 : len(routes)]] + [float("inf")]
    for ax, route, t_end in zip(axes[0], routes, ends):
        _draw_map(ax, scenario, True, max_edge)
        if route is None:
            continue
        xs, ys = zip(*route.waypoints)
        ax.plot(xs, ys, "--", color=_ROUTE, lw=1.2, gid=f"route-v{route.version}")
        driven = frame[frame["t"] <= t_end]
        if len(driven):
            ax.plot(driven["x"], driven["y"], color=_TRAJECTORY, lw=1.6, gid="trajectory")
        ax.set_title(f"route v{route.version} (t = {route.t:.1f} s)")
    fig.tight_layout()
    return fig


def emit_plots(
    log: EpisodeLog, scenario: Scenario, output_dir: Path, stem: str = "episode"
) -> list[Path]:
    """Write ``<stem>.svg`` and ``<stem>_routes.svg`` to ``output_dir``."""
    written = []
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        for suffix, builder in (("", build_figure), ("_routes", build_route_panels)):
            fig = builder(log, scenario)
            path = output_dir / f"{stem}{suffix}.svg"
            fig.savefig(path, format="svg")
            written.append(path)
    except OSError as e:
        raise PlotError(f"cannot write plots to {output_dir}: {e}") from e
    logger.info("[plot] wrote {}", ", ".join(str(p) for p in written))
    return written
