"""Numerical laboratory for generalized occupation-time formulas of continuous semimartingales."""

__version__ = "0.1.0"
