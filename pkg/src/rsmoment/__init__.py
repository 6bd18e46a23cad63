"""Numerical verification of the second-moment identity for Rankin-Selberg L-functions at level one."""

__version__ = "0.1.0"
