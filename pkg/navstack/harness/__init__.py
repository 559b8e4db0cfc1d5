"""Scenario generation, local maps, closed-loop episodes and plots."""

from .episode import Episode, EpisodeConfig, EpisodeLog, run_episode
from .local_map import clip, local_box, local_map
from .plotting import build_figure, build_route_panels, emit_plots
from .scenario import Scenario, generate_map, load_scenario, save_scenario
from .schemas import Outcome

__all__ = [
    "Episode",
    "EpisodeConfig",
    "EpisodeLog",
    "Outcome",
    "Scenario",
    "build_figure",
    "build_route_panels",
    "clip",
    "emit_plots",
    "generate_map",
    "load_scenario",
    "local_box",
    "local_map",
    "run_episode",
    "save_scenario",
]
