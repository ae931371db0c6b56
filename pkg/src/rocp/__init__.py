"""Recurrent off-policy continuous control."""
__version__ = "0.1.0"
