"""Test the command-line interface."""

import json
from pathlib import Path

import numpy as np
import pytest
import typer
from typer.testing import CliRunner

from navstack.cli import app, parse_overrides
from navstack.geometry import HPolytope, Point2
from navstack.harness import EpisodeLog, Outcome, Scenario, load_scenario, save_scenario
from navstack.miqp import dense_problem

runner = CliRunner()


@pytest.fixture
def tiny_scenario(tmp_path: Path) -> Path:
    scenario = Scenario(
        seed=42,
        arena=HPolytope.from_box(0.0, 0.0, 2.0, 2.0),
        mapped=(),
        unmapped=(),
        start=Point2(1.0, 1.0),
        goal=Point2(1.05, 1.0),
    )
    return save_scenario(scenario, tmp_path / "tiny.json")


def test_parse_overrides():
    """Test section.key=value strings with JSON and plain values."""
    parsed = parse_overrides(["mpc.N=10", "mpc.soften_terminal_velocity=true", "episode.time_limit=5.5", "plant.name=abc"])
    assert parsed == {
        "mpc": {"N": 10, "soften_terminal_velocity": True},
        "episode": {"time_limit": 5.5},
        "plant": {"name": "abc"},
    }
    with pytest.raises(typer.BadParameter):
        parse_overrides(["N=10"])


def test_gen_map(tmp_path: Path):
    """Test gen-map writes a loadable scenario."""
    out = tmp_path / "map.json"
    result = runner.invoke(app, ["gen-map", str(out), "--seed", "3", "--mapped", "2", "--unmapped", "1"])
    assert result.exit_code == 0
    assert "✅" in result.output
    scenario = load_scenario(out)
    assert (len(scenario.mapped), len(scenario.unmapped)) == (2, 1)


def test_gen_map_failure(tmp_path: Path):
    """Test an impossible map exits with status 1."""
    result = runner.invoke(app, ["gen-map", str(tmp_path / "m.json"), "--mapped=-1"])
    assert result.exit_code == 1


def test_solve_record(tmp_path: Path):
    """Test solve reads a problem record and reports an optimum."""
    H = 2 * np.array([[2.0, 1.0, -1.0], [1.0, 2.0, -1.0], [-1.0, -1.0, 1.0]])
    problem = dense_problem(H, [-0.6, -1.6, 0.0], A_in=[[0.0, 0.0, -1.0]], b_in=[-0.5], binaries=[0, 1], constant=0.73)
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(problem.to_record()), encoding="utf-8")
    result = runner.invoke(app, ["solve", str(path), "--brute-force"])
    assert result.exit_code == 0
    assert "Status: Optimal" in result.output
    assert "over 4 assignments" in result.output


def test_solve_missing_file(tmp_path: Path):
    """Test a missing record exits with status 1."""
    result = runner.invoke(app, ["solve", str(tmp_path / "none.json")])
    assert result.exit_code == 1


def test_run_bad_scenario(tmp_path: Path):
    """Test an invalid scenario file exits with status 1."""
    bad = tmp_path / "bad.json"
    bad.write_text("[]", encoding="utf-8")
    result = runner.invoke(app, ["run", "--scenario", str(bad), "--no-plot"])
    assert result.exit_code == 1


def test_run_tiny_scenario(tiny_scenario: Path, tmp_path: Path):
    """Test a run that starts at the goal writes its log and metrics."""
    out = tmp_path / "runs"
    metrics_file = tmp_path / "metrics.prom"
    result = runner.invoke(
        app,
        ["run", "--scenario", str(tiny_scenario), "--output-dir", str(out), "--no-plot", "--metrics-file", str(metrics_file)],
    )
    assert result.exit_code == 0
    assert "GoalReached" in result.output
    log = EpisodeLog.read_jsonl(out / "episode_42.jsonl")
    assert log.outcome is Outcome.GOAL_REACHED
    assert "navstack_" in metrics_file.read_text(encoding="utf-8")
