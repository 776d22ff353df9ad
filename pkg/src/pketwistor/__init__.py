"""Numerical workbench for para-Kaehler-Einstein metrics and their twistor distributions."""

__version__ = "0.1.0"
