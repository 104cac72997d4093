"""sonoc: exact second-order optimality checks for union-constrained programs."""

__version__ = "0.1.0"
