"""Error types shared across modules."""


class ProblemFormatError(Exception):
    """Problem file is malformed, inconsistent, or has an infeasible base point."""


class UnsupportedBallConfiguration(Exception):
    """Ball atoms overlap near the base point in a way the exact calculus cannot handle."""
