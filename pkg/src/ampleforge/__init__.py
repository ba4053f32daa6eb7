"""Nefness and ampleness certificates for blow-ups of the plane."""

__version__ = "0.1.0"
