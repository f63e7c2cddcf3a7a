"""Boundary estimation for electromagnetic head imaging."""

__version__ = "0.1.0"
