"""Out-of-distribution learning on discrete-time dynamic graphs."""

__version__ = "0.1.0"
