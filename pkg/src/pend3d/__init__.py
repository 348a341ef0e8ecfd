"""Simulation and analysis of the 3D pendulum."""

__version__ = "0.1.0"
