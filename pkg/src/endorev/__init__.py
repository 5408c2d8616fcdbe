"""Endoreversible engines and refrigerators optimized over the cold force."""

__version__ = "0.1.0"
