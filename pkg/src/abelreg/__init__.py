"""Closed-form solution and regularity checks for the two-sided Abel equation."""

__version__ = "0.1.0"
