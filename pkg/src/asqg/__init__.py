"""Dissipative alpha-SQG simulation and oscillatory pseudo-solution toolkit."""

__version__ = "0.1.0"
