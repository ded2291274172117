"""Exception types shared across the package."""

from __future__ import annotations


class JensenStabError(Exception):
    """Base class for all package errors."""


class InvalidElementError(JensenStabError, ValueError):
    """An element handle does not belong to the carrier it was used with."""


class CapabilityError(JensenStabError, ValueError):
    """An operation requires a mean capability the carrier does not have."""


class LatticeOverflowError(JensenStabError, OverflowError):
    """A lattice coordinate left the fixed-width integer range.

    Raised instead of wrapping around: dyadic powers grow like 2^n and a
    silent wraparound would corrupt every downstream limit.
    """


class NonConvergenceError(JensenStabError, RuntimeError):
    """An iterative construction did not converge within its budget."""

    def __init__(self, message: str, trace: list | None = None) -> None:
        super().__init__(message)
        self.trace = trace if trace is not None else []


class FormatError(JensenStabError, ValueError):
    """A carrier, function, or config file is structurally malformed."""
