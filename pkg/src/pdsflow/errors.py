"""Exception types shared across the package."""

from __future__ import annotations


class PdsflowError(Exception):
    """Base class for all package-specific errors."""


class NonConvergent(PdsflowError):
    """Neighbor imputation made no progress while values are still missing."""


class ZeroAggregate(PdsflowError):
    """A series sums to zero but a positive control total was requested."""


class Infeasible(PdsflowError):
    """Card totals exceed the state population; no capped allocation exists."""


class DegenerateRatio(PdsflowError):
    """AAY/Priority ratio is undefined (no Priority cardholders)."""


class DegenerateDesign(PdsflowError):
    """Regression input has no variance in the predictor."""


class LengthMismatch(PdsflowError):
    """Series to compare differ in length or are too short."""


class ConstantSeries(PdsflowError):
    """Pearson correlation is undefined for a constant series."""


class MissingYear(PdsflowError):
    """Requested year is absent from the storage series."""


class UnknownDistrict(PdsflowError):
    """An event or filter references a district id not in the dataset."""


class SpecError(PdsflowError):
    """A scenario or run configuration document is malformed."""


class ParseError(PdsflowError):
    """A tabular input file could not be parsed.

    Carries enough position information to point at the offending cell.
    """

    def __init__(self, file: str, line: int, column: str | int | None, message: str):
        self.file = file
        self.line = line
        self.column = column
        self.message = message
        where = f"{file}:{line}"
        if column is not None:
            where += f" (column {column})"
        super().__init__(f"{where}: {message}")


class ValidationFailed(PdsflowError):
    """Dataset validation produced a non-empty report."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class IoError(PdsflowError):
    """Trace or estimate files could not be written."""
