"""Generalized density points of measurable subsets of the real line."""

__version__ = "0.1.0"
