class FlagforgeError(Exception):
    """Base class for errors raised by flagforge."""


class InputError(FlagforgeError, ValueError):
    """Malformed or out-of-contract input."""


class UnsupportedUniformity(InputError):
    """Operation is only defined for a different uniformity."""


class DimensionMismatch(InputError):
    """Matrix, vector or file dimensions do not line up."""
