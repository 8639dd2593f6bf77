"""Fuzzy-adaptive genetic algorithm for renal diet composition."""

__version__ = "0.1.0"
