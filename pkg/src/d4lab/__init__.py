"""Exact computations with D(4)-tuples: extensions, bounds and reductions."""

__version__ = "0.1.0"

SCHEMA = "d4lab/1"
