"""Exact algebra for a real family of toric surfaces degenerating along six fibers."""

__version__ = "0.1.0"
