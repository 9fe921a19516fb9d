"""Reliable network formation games: costs, stability, dynamics and motif statistics."""

__version__ = "0.1.0"
