"""Density evolution and simulation for LDPC decoders with asymmetric
hardware deviations."""

__version__ = "0.1.0"
