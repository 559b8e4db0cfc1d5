"""Unicycle plant simulation and the path-following controller."""

from .controller import ControllerGains, control, path_errors
from .plant import ActuatorSetpoint, PlantParams, UnicycleState, step

__all__ = [
    "ActuatorSetpoint",
    "ControllerGains",
    "PlantParams",
    "UnicycleState",
    "control",
    "path_errors",
    "step",
]
