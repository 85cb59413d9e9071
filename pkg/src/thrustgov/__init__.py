"""Switching PI thrust governor for wind turbines, with a reduced-order plant to exercise it."""

__version__ = "0.1.0"
