"""Exception types raised by the library."""


class InvalidInputError(ValueError):
    """Input data or matrix violates a precondition (shape, finiteness, kind)."""


class DegenerateInputError(ValueError):
    """Input is valid but degenerate for the requested operation (e.g. zero bandwidth)."""


class SampleTooSmallError(ValueError):
    """Too few observations for the requested estimator."""
