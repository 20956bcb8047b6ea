"""Numerical toolkit for the half-plane transmission problem."""
__version__ = "0.1.0"
