"""Exception hierarchy for conflab.

Domain errors also derive from the closest built-in exception so callers can
catch either ``ConfLabError`` or e.g. ``ValueError``.
"""

from __future__ import annotations

from typing import Any, Sequence


class ConfLabError(Exception):
    """Base class for every error raised by conflab."""


class InvalidInstance(ConfLabError, ValueError):
    """A distribution, estimator or market instance violates its invariants."""


class IndexOutOfRange(ConfLabError, IndexError):
    """A review count outside ``0..c`` was requested."""


class NoPositiveRevenue(ConfLabError, ValueError):
    """No posted price yields positive revenue for the valuation law."""


class AbsorbingPrice(ConfLabError, ValueError):
    """The price gives zero purchase probability in some review state."""


class AbsorbingState(ConfLabError, ValueError):
    """A pricing policy leaves some review states without purchases."""

    def __init__(self, message: str, states: Sequence[Any] = ()):
        super().__init__(message)
        self.states = list(states)


class NotErgodic(ConfLabError, ValueError):
    """A finite chain is reducible or periodic."""


class InvalidStay(ConfLabError, ValueError):
    """A lazy-modification move probability lies outside (0, 1]."""


class InvalidParams(ConfLabError, ValueError):
    """Operation parameters outside their admissible range."""


class WindowTooLarge(ConfLabError, ValueError):
    """Exact state enumeration requested for a window beyond the cap."""


class NotCalibrated(ConfLabError, ValueError):
    """Belief-error formulas need h(0) = mu_L and h(1) = mu_H."""


class NotWellBehaved(ConfLabError, ValueError):
    """Uniqueness of the optimal prices is not established for this law."""


class ConfigInvalid(ConfLabError, ValueError):
    """Malformed configuration; ``field`` is the dotted path of the culprit."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


class BoundViolation(ConfLabError, ArithmeticError):
    """A proven bound failed numerically."""


class OracleFailure(ConfLabError):
    """Independent computations of the same quantity disagree."""
