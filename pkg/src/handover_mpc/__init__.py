"""Path-following MPC trajectory planner for human-robot handovers."""

__version__ = "0.1.0"
