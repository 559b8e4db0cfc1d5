"""Test episode configuration, logs and closed-loop runs."""

import math
from pathlib import Path

import pytest
from pydantic import ValidationError

from navstack.geometry import HPolytope, Point2
from navstack.harness import Episode, EpisodeConfig, EpisodeLog, Outcome, Scenario, run_episode
from navstack.harness.schemas import (
    OutcomeRecord,
    PlanEvent,
    ReplanEvent,
    RouteVersion,
    TelemetryRecord,
)


@pytest.fixture
def sample_log():
    log = EpisodeLog()
    log.add(RouteVersion(t=0.0, version=1, nodes=[0, 1], chains=[3], cost=5.0, waypoints=[(0.0, 0.0), (3.0, 4.0)]))
    for i, (x, y) in enumerate([(0.0, 0.0), (0.3, 0.4), (0.6, 0.8)]):
        log.add(TelemetryRecord(t=0.01 * (i + 1), x=x, y=y, theta=0.9, v=0.5, omega=0.0, clearance=1.0 - 0.1 * i))
    log.add(
        PlanEvent(
            t=0.0, status="Optimal", iterations=7, heuristic_solves=2, j_minus=10.0, j_plus=10.0,
            cells=3, target=(1.2, 1.6),
        )
    )
    log.add(
        ReplanEvent(
            t=0.02, j_minus=1500.0, iterations=1, removed_chains=[3], backtrack_node=9, wall_seconds=0.1
        )
    )
    log.add(OutcomeRecord(t=0.03, outcome=Outcome.TIMEOUT, reason="time limit"))
    return log


def test_default_periods_are_consistent():
    """Test the default plant, control and MPC periods nest."""
    config = EpisodeConfig()
    assert config.control_every == 2
    assert config.steps_per_period == 50


def test_rejects_uneven_periods():
    """Test a control period that is not a multiple of the plant step."""
    with pytest.raises(ValidationError):
        EpisodeConfig(control_dt=0.015)
    with pytest.raises(ValidationError):
        EpisodeConfig(plant_dt=0.05)


def test_with_overrides():
    """Test section overrides merge and revalidate."""
    config = EpisodeConfig().with_overrides({"mpc": {"N": 6}, "gains": {"k_t": 2.0}, "episode": {"time_limit": 5.0}})
    assert config.mpc.N == 6
    assert config.mpc.dt == 0.5
    assert config.gains.k_t == 2.0
    assert config.time_limit == 5.0
    with pytest.raises(ValueError):
        EpisodeConfig().with_overrides({"radar": {"range": 3}})
    with pytest.raises(ValidationError):
        EpisodeConfig().with_overrides({"mpc": {"N": 0}})


def test_log_summary(sample_log):
    """Test the summary counts events and measures the path."""
    summary = sample_log.summary()
    assert summary["outcome"] == "Timeout"
    assert summary["plans"] == 1
    assert summary["replans"] == 1
    assert summary["route_versions"] == 1
    assert summary["path_length_m"] == pytest.approx(1.0)
    assert summary["min_clearance_m"] == pytest.approx(0.8)
    assert summary["max_iterations"] == 7


def test_log_jsonl_round_trip(sample_log, tmp_path: Path):
    """Test the JSON lines log reads back with the same records."""
    path = sample_log.write_jsonl(tmp_path / "logs" / "e.jsonl")
    loaded = EpisodeLog.read_jsonl(path)
    assert len(loaded.records) == len(sample_log.records)
    assert loaded.outcome is Outcome.TIMEOUT
    assert loaded.replans[0].j_minus == 1500.0
    assert loaded.routes[0].waypoints == [(0.0, 0.0), (3.0, 4.0)]
    assert loaded.summary() == sample_log.summary()


def test_start_at_goal():
    """Test an episode that starts inside the goal tolerance ends at t = 0."""
    scenario = Scenario(
        seed=0,
        arena=HPolytope.from_box(0.0, 0.0, 2.0, 2.0),
        mapped=(),
        unmapped=(),
        start=Point2(1.0, 1.0),
        goal=Point2(1.05, 1.0),
    )
    log = run_episode(scenario)
    assert log.outcome is Outcome.GOAL_REACHED
    assert log.records[-1].t == 0.0
    assert len(log.routes) == 1
    assert log.plans == []


def test_scenario_overrides_apply(walled_scenario):
    """Test overrides stored in the scenario reach the episode configuration."""
    episode = Episode(walled_scenario)
    assert episode.config.mpc.N == 6
    assert episode.config.time_limit == 40.0


@pytest.mark.slow
def test_open_arena_reaches_goal(open_scenario):
    """Test the vehicle crosses an empty arena without re-planning."""
    log = run_episode(open_scenario)
    assert log.outcome is Outcome.GOAL_REACHED
    assert log.replans == []
    last = log.telemetry[-1]
    assert math.hypot(last.x - 3.5, last.y - 3.5) <= 0.15
    assert all(r.clearance == math.inf for r in log.telemetry)


@pytest.mark.slow
def test_unmapped_wall_blocks_goal(walled_scenario):
    """Test a wall across the whole arena ends Stuck once deleting corridors leaves no route."""
    log = run_episode(walled_scenario)
    assert log.outcome is Outcome.STUCK
    [ending] = [r for r in log.records if isinstance(r, OutcomeRecord)]
    assert ending.reason == "no route after corridor deletion"
    assert 1 <= len(log.replans) <= EpisodeConfig().max_replans
    assert all(event.removed_chains for event in log.replans)
    assert min(r.x for r in log.telemetry) >= 0.0
    assert max(r.x for r in log.telemetry) < 2.8
