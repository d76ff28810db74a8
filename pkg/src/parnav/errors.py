"""Exception types shared across the toolkit.

Every failure mode that callers are expected to branch on gets its own
class; anything else is allowed to surface as a plain ValueError from
the offending helper.
"""

from __future__ import annotations


class ParnavError(Exception):
    """Base class for all toolkit-specific errors."""


class InvalidInputError(ParnavError):
    """Malformed or inconsistent arguments (bad shapes, bad ranges, bad files)."""


class OutOfDomainError(ParnavError):
    """A metric evaluation was requested where the metric is undefined.

    For the navigation metric this means the denominator
    ``v_M cos(delta) |y| - <y, v_T>`` is not strictly positive, i.e. the
    candidate velocity does not actually close on the target.
    """


class InfeasibleControlError(ParnavError):
    """The guidance law has no real lead angle for the requested geometry."""


class UnreachableError(ParnavError):
    """No interception is possible within the allotted horizon."""


class ConvergenceError(ParnavError):
    """An iterative solve (shooting, bracketing, refinement) failed to converge."""


class PartialCurveError(ParnavError):
    """Geodesic integration left the metric's domain before the horizon.

    The prefix of the curve that was completed is attached as ``partial``
    so callers can inspect how far the flow got.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
