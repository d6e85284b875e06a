"""Exact cyclic-homology operators, JLO cocycles and fixed-point index checks."""

from . import algebra, forms, scalars

__all__ = ["algebra", "forms", "scalars"]
__version__ = "0.1.0"
