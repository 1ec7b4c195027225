"""Exception types raised across the package."""


class HoloError(Exception):
    """Base class for package errors."""


class InvalidInputError(HoloError, ValueError):
    """Input violates a precondition (non-finite values, degenerate size)."""


class ShapeError(HoloError, ValueError):
    """Array dimensions do not agree."""


class NumericalError(HoloError, ArithmeticError):
    """A non-finite value appeared during a computation."""


class FormatError(HoloError, ValueError):
    """A file does not follow its declared format."""
