"""Domain error hierarchy shared by the library, the CLI, and the HTTP service.

The CLI maps any :class:`WorkbenchError` to exit code 1 (usage problems exit
2); the HTTP service maps subclasses to status codes (404 unknown resource,
409 gating violation, 422 payload contract violation, 400 otherwise).
"""

from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for all domain errors."""


class BundleParseError(WorkbenchError):
    """A bundle file is missing or not parseable."""


class BundleValidationError(WorkbenchError):
    """A bundle failed validation; carries the full report."""

    def __init__(self, report):
        self.report = report
        lines = "; ".join(issue.message for issue in report.errors[:5])
        more = "" if len(report.errors) <= 5 else f" (+{len(report.errors) - 5} more)"
        super().__init__(f"bundle validation failed: {lines}{more}")


class UnknownIdError(WorkbenchError):
    """A referenced id (feature, project, template, step...) does not exist."""


class GatingError(WorkbenchError):
    """A workflow step was submitted out of order."""

    def __init__(self, message: str, missing_step: str | None = None):
        super().__init__(message)
        self.missing_step = missing_step


class DuplicateSubmissionError(GatingError):
    """The same (step, iteration) pair was submitted twice."""

    def __init__(self, message: str):
        super().__init__(message, missing_step=None)


class PayloadError(WorkbenchError):
    """A step payload or operation input violates its contract."""


class DesignError(WorkbenchError):
    """An experiment design request violates its preconditions."""


class PowerTargetError(DesignError):
    """The requested power target is unreachable within the allowed replicates."""

    def __init__(self, message: str, achieved_power: float, n_max: int):
        super().__init__(message)
        self.achieved_power = achieved_power
        self.n_max = n_max


class AdapterMismatchError(WorkbenchError):
    """Adapter placeholders or extraction rules do not cover the plan."""


class FailureBudgetError(WorkbenchError):
    """Too many runs failed; carries the partial execution result."""

    def __init__(self, message: str, result):
        super().__init__(message)
        self.result = result


class IncompleteProjectError(WorkbenchError):
    """An operation requires a completed (concluded) project."""


class DomainMismatchError(WorkbenchError):
    """Two artefacts reference incompatible bundle domains."""
