"""Numerical laboratory for the Omori-Yau maximum principle on model manifolds."""

__version__ = "0.1.0"
