"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MaslovError(ValueError):
    """Base class for every error raised by this package."""


class ShapeError(MaslovError):
    pass


class RankError(MaslovError):
    pass


class NotLagrangianError(MaslovError):
    pass


class FieldMismatchError(MaslovError):
    pass


class StepBoundError(MaslovError):
    """Consecutive samples too far apart for unambiguous branch tracking."""


class AliasingError(StepBoundError):
    """A phase increment reached pi, so the continuous lift is ambiguous."""


class ReferenceDataError(MaslovError):
    pass


class StructuralError(MaslovError):
    """Nerve and data do not fit together (missing keys, bad references)."""

    def __init__(self, message: str, missing: list | None = None):
        super().__init__(message)
        self.missing = list(missing or [])


class CocycleError(MaslovError):
    """The transition cocycle identity fails somewhere."""

    def __init__(self, message: str, key=None, deviation: float | None = None):
        super().__init__(message)
        self.key = key
        self.deviation = deviation


class IntegralityError(MaslovError):
    pass


class ConnectivityError(MaslovError):
    pass


class SnapError(MaslovError):
    pass


class NoFundamentalCycleError(MaslovError):
    pass


class TheoremViolation(MaslovError):
    """Two routes that must agree did not; always an implementation bug."""

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}
