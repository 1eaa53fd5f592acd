"""Exact computation in iterated wreath products acting on rooted trees."""

__version__ = "0.1.0"
