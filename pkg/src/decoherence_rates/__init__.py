"""Simulation and direct two-copy estimation of decoherence rates."""

__version__ = "0.1.0"
