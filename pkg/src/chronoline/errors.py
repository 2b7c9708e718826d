"""Exception and warning types raised across the package."""

from __future__ import annotations

__all__ = [
    "ChronolineError",
    "RangeError",
    "SingularTimeError",
    "AccuracyError",
    "IrrationalSpectrumError",
    "SpectrumMismatchError",
    "UnsupportedStateError",
    "ConvergenceWarning",
]


class ChronolineError(Exception):
    """Base class for all package errors."""


class RangeError(ChronolineError, ValueError):
    """Argument outside the supported domain of a function."""


class SingularTimeError(ChronolineError, ValueError):
    """A closed form was requested at a singular system time (tau = 0)."""


class AccuracyError(ChronolineError, ArithmeticError):
    """The requested accuracy cannot be certified by the evaluation scheme."""


class IrrationalSpectrumError(ChronolineError):
    """Gap ratios could not be rationalized within the denominator budget.

    Attributes
    ----------
    best_effort : object
        The best revival estimate found, usually a ``RevivalData``.
    """

    def __init__(self, message: str, best_effort=None):
        super().__init__(message)
        self.best_effort = best_effort


class SpectrumMismatchError(ChronolineError, ValueError):
    """A time mesh or revival record does not belong to the given spectrum."""


class UnsupportedStateError(ChronolineError, ValueError):
    """Operation not defined for the supplied kind of state."""


class ConvergenceWarning(UserWarning):
    """Quadrature finished without meeting its tolerance."""
