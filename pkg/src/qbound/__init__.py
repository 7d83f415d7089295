"""Quantum constraints on expectation values, allowed regions and tight uncertainty bounds."""

__version__ = "0.1.0"
