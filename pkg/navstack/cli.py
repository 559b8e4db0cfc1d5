"""Command-line interface: run episodes, generate maps, plot logs, solve MIQPs."""

import json
import math
from pathlib import Path
from typing import Any, Optional

import typer
from loguru import logger

from navstack import metrics
from navstack.config import settings
from navstack.errors import NavStackError
from navstack.harness import (
    EpisodeConfig,
    EpisodeLog,
    emit_plots,
    generate_map,
    load_scenario,
    run_episode,
    save_scenario,
)
from navstack.log_config import configure_logging
from navstack.miqp import MIQProblem, enumerate_binaries
from navstack.miqp import solve as solve_miqp

app = typer.Typer(
    name="navstack",
    help="Medial-axis global planning with a mixed-integer MPC re-plan trigger",
    no_args_is_help=True,
)

EXIT_CODES = {"GoalReached": 0, "Stuck": 2, "Timeout": 3}


@app.callback()
def main(
    log_level: str = typer.Option(settings.log_level, "--log-level", help="Log level"),
    log_format: str = typer.Option(settings.log_format, "--log-format", help="json or text"),
) -> None:
    configure_logging(log_level, log_format)


def parse_overrides(items: list[str]) -> dict[str, dict[str, Any]]:
    """``section.key=value`` strings to nested overrides; values are parsed as JSON when possible."""
    overrides: dict[str, dict[str, Any]] = {}
    for item in items:
        key, sep, raw = item.partition("=")
        section, dot, name = key.partition(".")
        if not sep or not dot or not name:
            raise typer.BadParameter(f"expected section.key=value, got {item!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        overrides.setdefault(section, {})[name] = value
    return overrides


@app.command()
def run(
    scenario_file: Optional[Path] = typer.Option(None, "--scenario", help="Scenario JSON file"),
    seed: Optional[int] = typer.Option(None, help="Generate a random scenario with this seed"),
    output_dir: Path = typer.Option(Path(settings.output_dir), help="Where logs and plots go"),
    overrides: Optional[list[str]] = typer.Option(None, "--set", help="Override, e.g. mpc.N=10"),
    plot: bool = typer.Option(True, help="Write SVG plots after the run"),
    metrics_file: Optional[Path] = typer.Option(None, help="Write Prometheus metrics here"),
) -> None:
    """Run one closed-loop episode."""
    try:
        if scenario_file is not None:
            scenario = load_scenario(scenario_file)
        else:
            scenario = generate_map(settings.default_seed if seed is None else seed)
        config = EpisodeConfig().with_overrides(parse_overrides(overrides or []))
        log = run_episode(scenario, config)
        log_path = log.write_jsonl(output_dir / f"episode_{scenario.seed}.jsonl")
        typer.echo(f"Log: {log_path}")
        if plot:
            for path in emit_plots(log, scenario, output_dir, stem=f"episode_{scenario.seed}"):
                typer.echo(f"Plot: {path}")
        if metrics_file is not None:
            metrics.write_metrics(metrics_file)
    except (NavStackError, ValueError) as e:
        typer.echo(f"❌ Run failed: {e}", err=True)
        raise typer.Exit(1)

    summary = log.summary()
    outcome = summary["outcome"]
    mark = "✅" if outcome == "GoalReached" else "❌"
    typer.echo(f"{mark} {outcome} after {summary['duration_s']:.2f} s")
    typer.echo(f"Plans: {summary['plans']}  Re-plans: {summary['replans']}")
    typer.echo(f"Path length: {summary['path_length_m']:.2f} m")
    typer.echo(f"Min clearance: {summary['min_clearance_m']:.3f} m")
    raise typer.Exit(EXIT_CODES.get(outcome, 1))


@app.command("gen-map")
def gen_map(
    output: Path = typer.Argument(..., help="Scenario JSON file to write"),
    seed: int = typer.Option(settings.default_seed, help="Random seed"),
    mapped: int = typer.Option(6, help="Number of mapped obstacles"),
    unmapped: int = typer.Option(4, help="Number of unmapped obstacles"),
    size: float = typer.Option(10.0, help="Arena width and height (m)"),
) -> None:
    """Generate a random scenario file."""
    try:
        scenario = generate_map(seed, arena=(0.0, 0.0, size, size), counts=(mapped, unmapped))
        save_scenario(scenario, output)
    except NavStackError as e:
        typer.echo(f"❌ Map generation failed: {e}", err=True)
        raise typer.Exit(1)
    typer.echo(f"✅ Wrote {output} ({mapped} mapped, {unmapped} unmapped obstacles)")


@app.command()
def plot(
    log_file: Path = typer.Argument(..., help="Episode log (JSON lines)"),
    scenario_file: Path = typer.Option(..., "--scenario", help="Scenario the log was recorded on"),
    output_dir: Path = typer.Option(Path(settings.output_dir), help="Where plots go"),
) -> None:
    """Render SVG plots of a recorded episode."""
    try:
        log = EpisodeLog.read_jsonl(log_file)
        scenario = load_scenario(scenario_file)
        paths = emit_plots(log, scenario, output_dir, stem=log_file.stem)
    except (NavStackError, OSError, ValueError) as e:
        typer.echo(f"❌ Plotting failed: {e}", err=True)
        raise typer.Exit(1)
    for path in paths:
        typer.echo(f"✅ {path}")


@app.command()
def solve(
    problem_file: Path = typer.Argument(..., help="MIQP record (JSON)"),
    j_max: float = typer.Option(math.inf, help="Stop once the lower bound exceeds this"),
    iteration_limit: int = typer.Option(settings.iteration_limit, help="Max relaxations"),
    brute_force: bool = typer.Option(False, help="Also enumerate every binary assignment"),
) -> None:
    """Solve one MIQP with branch and bound and print the solver statistics."""
    try:
        problem = MIQProblem.from_record(json.loads(problem_file.read_text(encoding="utf-8")))
        outcome = solve_miqp(problem, j_max=j_max, iteration_limit=iteration_limit)
    except (NavStackError, OSError, json.JSONDecodeError) as e:
        typer.echo(f"❌ Solve failed: {e}", err=True)
        raise typer.Exit(1)

    typer.echo(f"Status: {outcome.status.value}")
    typer.echo(f"Iterations: {outcome.iterations} (+{outcome.heuristic_solves} heuristic)")
    typer.echo(f"j-: {outcome.j_minus:.6g}")
    typer.echo(f"j+: {outcome.j_plus:.6g}")
    if brute_force:
        best, _ = enumerate_binaries(problem)
        typer.echo(f"Enumeration: {best:.6g} over {2 ** len(problem.binaries)} assignments")
    logger.debug("[cli] solve trace has {} records", len(outcome.trace))


if __name__ == "__main__":
    app()
