"""Semiparametric exponential-tilt estimation of heavy tails."""

__version__ = "0.1.0"
