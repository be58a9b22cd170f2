"""Explicit geometric and spectral bounds for SL2/GL2 over quadratic fields."""

__version__ = "0.1.0"
