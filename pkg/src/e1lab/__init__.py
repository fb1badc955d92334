"""Numerical laboratory for vanishing-E1 surfaces in the Heisenberg group."""

__version__ = "0.1.0"
