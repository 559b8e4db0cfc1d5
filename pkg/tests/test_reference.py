"""Test lookahead references, flat-to-unicycle conversion and plan interpolation."""

import math

import numpy as np
import pytest

from navstack.errors import EmptyRouteError
from navstack.geometry import Point2
from navstack.mpc import PlanReference, flat_to_unicycle, lookahead_reference, route_progress

STRAIGHT = np.array([[0.0, 0.0], [10.0, 0.0]])
L_SHAPE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 5.0]])


def test_lookahead_along_straight_route():
    """Test the point 2 m ahead of the start."""
    p = lookahead_reference(STRAIGHT, Point2(0.0, 0.0), 2.0)
    assert (p.x, p.y) == pytest.approx((2.0, 0.0))


def test_lookahead_saturates_at_route_end():
    """Test a lookahead past the end returns the endpoint."""
    p = lookahead_reference(STRAIGHT, Point2(9.0, 0.0), 2.0)
    assert (p.x, p.y) == pytest.approx((10.0, 0.0))


def test_lookahead_follows_arc_length():
    """Test distance is measured along the polyline, not the chord."""
    p = lookahead_reference(L_SHAPE, Point2(0.0, 0.0), 2.0)
    assert (p.x, p.y) == pytest.approx((1.0, 1.0))


def test_lookahead_from_off_route_point():
    """Test the vehicle is projected onto the route first."""
    p = lookahead_reference(STRAIGHT, Point2(3.0, 0.7), 1.5)
    assert (p.x, p.y) == pytest.approx((4.5, 0.0))


def test_lookahead_single_point_route():
    """Test a one-point route is its own reference."""
    p = lookahead_reference(np.array([[2.0, 3.0]]), Point2(0.0, 0.0), 1.0)
    assert (p.x, p.y) == (2.0, 3.0)


def test_lookahead_rejects_bad_input():
    """Test nonpositive distances and empty routes raise."""
    with pytest.raises(ValueError):
        lookahead_reference(STRAIGHT, Point2(0.0, 0.0), 0.0)
    with pytest.raises(EmptyRouteError):
        lookahead_reference(np.zeros((0, 2)), Point2(0.0, 0.0), 1.0)


def test_progress_does_not_jump_back():
    """Test the closest-point search starts at the previous progress."""
    hairpin = np.array([[0.0, 0.0], [4.0, 0.0], [4.0, 0.2], [0.0, 0.2]])
    q = Point2(1.0, 0.05)
    assert route_progress(hairpin, q) == pytest.approx(1.0)
    assert route_progress(hairpin, q, min_progress=4.1) == pytest.approx(7.2)


def test_unicycle_speed_and_heading():
    """Test the 3-4-5 velocity."""
    v, theta, omega = flat_to_unicycle(np.array([[0.0, 0.0, 0.3, 0.4]]), np.zeros((1, 2)))
    assert v[0] == pytest.approx(0.5)
    assert theta[0] == pytest.approx(math.atan2(0.4, 0.3))
    assert omega[0] == 0.0


def test_unicycle_turn_rate():
    """Test ω = (ẋÿ - ẏẍ) / (ẋ² + ẏ²)."""
    _, _, omega = flat_to_unicycle(np.array([[0.0, 0.0, 1.0, 0.0]]), np.array([[0.0, 2.0]]))
    assert omega[0] == pytest.approx(2.0)


def test_unicycle_on_circle():
    """Test a circular trajectory has ω = v / r."""
    r, v = 2.0, 1.0
    phi = np.linspace(0.0, 2 * np.pi, 40)
    states = np.column_stack([r * np.cos(phi), r * np.sin(phi), -v * np.sin(phi), v * np.cos(phi)])
    inputs = -(v**2 / r) * np.column_stack([np.cos(phi), np.sin(phi)])
    _, _, omega = flat_to_unicycle(states, inputs)
    np.testing.assert_allclose(omega, v / r)


def test_unicycle_holds_heading_at_rest():
    """Test zero speed keeps the previous heading with zero turn rate."""
    states = np.array([[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.5, 0.0, 0.0]])
    v, theta, omega = flat_to_unicycle(states, np.zeros((2, 2)), initial_heading=0.7)
    assert theta.tolist() == pytest.approx([0.7, math.pi / 2, math.pi / 2])
    assert omega.tolist() == [0.0, 0.0, 0.0]
    assert v[2] == 0.0


def test_plan_reference_interpolates():
    """Test midpoints between knots and the short way around for headings."""
    ref = PlanReference(
        t0=1.0,
        dt=0.5,
        positions=np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]),
        v_r=np.array([0.0, 1.0, 1.0]),
        theta_r=np.array([3.0, -3.0, -3.0]),
        omega_r=np.zeros(3),
    )
    s = ref.at(1.25)
    assert (s.position.x, s.position.y) == pytest.approx((0.5, 0.0))
    assert s.v == pytest.approx(0.5)
    assert abs(s.theta) > 3.0
    assert ref.t_end == pytest.approx(2.0)


def test_plan_reference_holds_after_end():
    """Test the final position is held with zero speed."""
    ref = PlanReference(
        t0=0.0,
        dt=0.5,
        positions=np.array([[0.0, 0.0], [1.0, 0.0]]),
        v_r=np.array([1.0, 1.0]),
        theta_r=np.zeros(2),
        omega_r=np.array([0.3, 0.3]),
    )
    s = ref.at(5.0)
    assert (s.position.x, s.position.y) == (1.0, 0.0)
    assert s.v == 0.0
    assert s.omega == 0.0
