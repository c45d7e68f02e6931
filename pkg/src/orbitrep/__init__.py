"""Symbolic dynamics and orbit representations of linear mod 1 maps, in exact arithmetic."""

__version__ = "0.1.0"
