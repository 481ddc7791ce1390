"""
Typed errors raised by the analysis modules.

Every error carries a ``module`` tag naming the pipeline stage that raised it,
so the command line can report ``error [streamtemp]: ...`` and pick an exit
code. All errors derive from ``ValueError`` so callers that only care about
bad input can keep catching that.
"""

from __future__ import annotations

from typing import Optional


class PowerRiskError(ValueError):
    """Base class for all domain errors."""

    module: str = "core"

    def __init__(self, message: str, *, module: Optional[str] = None):
        super().__init__(message)
        if module is not None:
            self.module = module


class InvalidInputError(PowerRiskError):
    """An argument violates an operation's contract (negative population, CF out of range...)."""


class DomainCoverageError(PowerRiskError):
    """A point or target grid lies outside the source grid hull."""

    module = "geogrid"


class AlignmentError(PowerRiskError):
    """Two inputs that must share a grid, time axis or provenance do not."""


class CoverageError(PowerRiskError):
    """A time window or partition is not fully covered by the data."""


class UndefinedRateError(PowerRiskError):
    """Growth rate requested for a county with no base-year population."""

    module = "demography"


class InvalidRateError(PowerRiskError):
    """Growth rate below -100%/year."""

    module = "demography"


class InvalidReferenceError(PowerRiskError):
    """National reference population is not positive."""

    module = "demography"


class EmptyEnsembleError(PowerRiskError):
    """An ensemble statistic was requested over zero members."""

    module = "ensemble"


class RankError(PowerRiskError):
    """Order statistic rank outside ``1..count``."""

    module = "ensemble"


class InsufficientDataError(PowerRiskError):
    """Too few observations for the requested computation."""

    module = "streamtemp"


class ZeroVarianceError(PowerRiskError):
    """A series that must vary is constant."""

    module = "streamtemp"


class ConditioningError(PowerRiskError):
    """The LS-SVM saddle-point system could not be solved accurately."""

    module = "streamtemp"


class ShapeError(PowerRiskError):
    """Array dimensions do not match."""

    module = "streamtemp"


class ThermalShutdownError(PowerRiskError):
    """Intake water is too warm for any allowable temperature rise."""

    module = "thermal"


class DatasetValidationError(PowerRiskError):
    """A dataset file failed schema, range or referential checks."""

    module = "cli"


class DatasetParseError(DatasetValidationError):
    """A dataset file could not be parsed as CSV."""

    def __init__(self, message: str, *, path: str, line: Optional[int] = None):
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}")
        self.detail = message
        self.path = path
        self.line = line
