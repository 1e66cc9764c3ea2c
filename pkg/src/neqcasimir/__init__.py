"""Casimir pressures and forces between a biased semiconductor and a passive plate."""

__version__ = "0.1.0"
