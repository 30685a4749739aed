"""receptorlab - Interference-robust molecular receiver simulation."""

__version__ = "1.0.0"
