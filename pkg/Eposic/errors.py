"""
Exception types raised by the Eposic package.

Every error derives from the closest built-in exception as well as from
``EposicError`` so callers can catch either the specific built-in or
everything the package raises.
"""

import sys


class EposicError(Exception):
    """Base class for all package errors."""


class NegativeRadicand(EposicError, ValueError):
    """Square root requested of a negative rational."""


class NotReal(EposicError, ValueError):
    """A real-only operation received a scalar with an imaginary part."""


class ShapeMismatch(EposicError, ValueError):
    """Operands live on incompatible spaces."""


class InvalidIndex(EposicError, ValueError):
    """A Clebsch–Gordan index (m, n, h) or a derived index is out of range."""


class InvalidDegree(EposicError, ValueError):
    """A polynomial degree is outside the range an operation supports."""


class NotUnit(EposicError, ValueError):
    """A vector or group element that must have norm one does not."""


class ParseError(EposicError, ValueError):
    """Text or JSON does not follow the canonical exact grammar or schema."""


class VerificationFailure(EposicError, AssertionError):
    """Two independent constructions of the same object disagree."""


def warn(message: str) -> None:
    """Report a non-critical problem as a ``[WARN]`` line on stderr."""
    print(f"[WARN] {message}", file=sys.stderr)
