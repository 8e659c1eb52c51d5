"""Numerical workbench for rearrangement, Hilbert-transform and logarithmic-determinant inequalities."""

__version__ = "0.1.0"
