"""Semantic exception hierarchy shared across the package.

Every error raised by mixlaw derives from :class:`MixlawError`, so callers
can catch the whole family with one clause.  Most classes double as the
closest builtin (``ValueError`` / ``LookupError``) for ergonomic catching.
"""


class MixlawError(Exception):
    """Base class for all mixlaw errors."""


class InvariantViolation(MixlawError, ValueError):
    """A domain-type invariant was violated at construction or ingestion."""


class DomainError(MixlawError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ZeroShotError(DomainError):
    """Weight p = 0 was requested; zero-shot behavior is out of scope."""


class UnknownWeightingError(MixlawError, LookupError):
    """A joint law has no beta for the requested weighting."""


class MissingBaselineError(MixlawError, LookupError):
    """A joint law has no p = 1 beta, so effective fractions are undefined."""


class MissingTaskError(MixlawError, LookupError):
    """No fitted law or fraction curve is available for the requested task."""


class InsufficientDataError(MixlawError, ValueError):
    """Too few (or too degenerate) data points for the requested fit."""


class RankDeficientDataError(InsufficientDataError):
    """Bivariate fit inputs lack variation along one size axis."""


class DegenerateWeightingError(InsufficientDataError):
    """A weighting in a joint fit has a single point."""


class FitFailedError(MixlawError, RuntimeError):
    """A fitting procedure could not produce a usable result."""


class ParseError(MixlawError, ValueError):
    """A dataset file could not be parsed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class EmptyDatasetError(MixlawError, ValueError):
    """A fit dataset selection produced no points."""


class MissingMetricError(MixlawError, LookupError):
    """The requested metric never appears in the selected records."""


class CoverageError(MixlawError, LookupError):
    """A synthetic weighting requests a beta outside the tabulated map."""


class VersionMismatchError(MixlawError, ValueError):
    """A bundle's schema version does not match the reader's."""


class CorruptBundleError(MixlawError, ValueError):
    """A bundle file failed its checksum or is not well-formed."""
