"""Stokes geometry of Painleve equations with a large parameter."""

__version__ = "0.1.0"
