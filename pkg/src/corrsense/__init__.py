"""Correlated-noise sensing with two-qubit STIRAP efficiencies."""

__version__ = "0.1.0"
