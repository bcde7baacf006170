"""Cooperative kitchen gridworld with hierarchical sub-task agents."""

__version__ = "0.1.0"
