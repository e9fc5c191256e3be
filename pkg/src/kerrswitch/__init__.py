"""Kerr-nonlinear Sagnac fiber switch simulator."""

__version__ = "0.1.0"
