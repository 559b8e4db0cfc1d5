"""navstack: medial-axis global planning with a mixed-integer MPC re-plan trigger."""

__version__ = "0.1.0"
