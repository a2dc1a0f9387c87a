"""Adaptive burst allocation at a cooperative relay serving two cell-border mobiles."""

__version__ = "0.1.0"
