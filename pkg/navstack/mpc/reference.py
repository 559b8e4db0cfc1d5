"""Line-of-sight terminal references and flat-output to unicycle conversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from shapely.geometry import LineString
from shapely.geometry import Point as ShapelyPoint
from shapely.ops import substring

from navstack.errors import EmptyRouteError
from navstack.geometry.sets import Point2, wrap_angle
from navstack.medial_axis.route import Route


def _route_points(route: Route | np.ndarray) -> np.ndarray:
    pts = route.polyline if isinstance(route, Route) else np.asarray(route, dtype=float)
    if pts.size == 0:
        raise EmptyRouteError("route has no waypoints")
    return pts.reshape(-1, 2)


def route_progress(route: Route | np.ndarray, q_veh: Point2, min_progress: float = 0.0) -> float:
    """Arc length of the route point closest to ``q_veh``, searching beyond ``min_progress``."""
    pts = _route_points(route)
    if len(pts) == 1:
        return 0.0
    line = LineString(pts)
    start = min(max(min_progress, 0.0), line.length)
    tail = substring(line, start, line.length) if start > 0 else line
    if tail.length == 0:
        return start
    return start + float(tail.project(ShapelyPoint(q_veh.x, q_veh.y)))


def lookahead_reference(
    route: Route | np.ndarray, q_veh: Point2, distance: float, min_progress: float = 0.0
) -> Point2:
    """Point ``distance`` further along the route than the point closest to ``q_veh``.

    The result saturates at the route end. ``min_progress`` restricts the
    closest-point search to the route after that arc length, which keeps the
    reference from jumping back when a route doubles back on itself.
    """
    if not distance > 0:
        raise ValueError(f"lookahead distance must be positive, got {distance}")
    pts = _route_points(route)
    if len(pts) == 1:
        return Point2.from_array(pts[0])
    line = LineString(pts)
    s = route_progress(pts, q_veh, min_progress)
    p = line.interpolate(min(s + distance, line.length))
    return Point2(p.x, p.y)


def flat_to_unicycle(
    states: np.ndarray, inputs: np.ndarray, initial_heading: float = 0.0, eps: float = 1e-6
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-step ``(v_r, θ_r, ω_r)`` for flat states ``(x, y, ẋ, ẏ)`` and inputs ``(ẍ, ÿ)``.

    Where the speed is below ``eps`` the heading of the previous step is held
    (``initial_heading`` for step 0) and ``ω_r`` is 0. Steps past the last
    input use zero acceleration.
    """
    states = np.asarray(states, dtype=float).reshape(-1, 4)
    inputs = np.asarray(inputs, dtype=float).reshape(-1, 2)
    n = len(states)
    accel = np.zeros((n, 2))
    accel[: min(n, len(inputs))] = inputs[:n]

    vx, vy = states[:, 2], states[:, 3]
    speed2 = vx**2 + vy**2
    v_r = np.sqrt(speed2)
    theta_r = np.empty(n)
    omega_r = np.zeros(n)
    heading = wrap_angle(initial_heading)
    for k in range(n):
        if v_r[k] > eps:
            heading = math.atan2(vy[k], vx[k])
            omega_r[k] = (vx[k] * accel[k, 1] - vy[k] * accel[k, 0]) / speed2[k]
        theta_r[k] = heading
    return v_r, theta_r, omega_r


@dataclass(frozen=True)
class ReferenceSample:
    position: Point2
    v: float
    theta: float
    omega: float


@dataclass(frozen=True, eq=False)
class PlanReference:
    """Knot values of a motion plan, interpolated for the path-following controller."""

    t0: float
    dt: float
    positions: np.ndarray
    v_r: np.ndarray
    theta_r: np.ndarray
    omega_r: np.ndarray

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (len(self.positions) - 1)

    def at(self, t: float) -> ReferenceSample:
        """Position, v and ω linear between knots; θ along the shorter arc.

        Before ``t0`` the first knot is returned; after the last knot the plan's
        final position is held with zero speed and turn rate.
        """
        last = len(self.positions) - 1
        if last == 0 or t >= self.t_end:
            return ReferenceSample(
                Point2.from_array(self.positions[last]), 0.0, float(self.theta_r[last]), 0.0
            )
        s = max(t - self.t0, 0.0) / self.dt
        i = min(int(s), last - 1)
        a = s - i
        pos = (1 - a) * self.positions[i] + a * self.positions[i + 1]
        theta = wrap_angle(self.theta_r[i] + a * wrap_angle(self.theta_r[i + 1] - self.theta_r[i]))
        return ReferenceSample(
            position=Point2.from_array(pos),
            v=float((1 - a) * self.v_r[i] + a * self.v_r[i + 1]),
            theta=float(theta),
            omega=float((1 - a) * self.omega_r[i] + a * self.omega_r[i + 1]),
        )
