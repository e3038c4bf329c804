"""Exception types raised by tagtrend."""
from __future__ import annotations


class TagTrendError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(TagTrendError, ValueError):
    pass


class CommentParseError(TagTrendError):
    """Fatal problem while reading the comments CSV."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{where}")


class TagFormatError(TagTrendError, ValueError):
    pass


class EmptyTimelineError(TagTrendError):
    pass


class UndefinedMetricError(TagTrendError, ZeroDivisionError):
    """Support, confidence or lift has a zero denominator."""


class InsufficientDataError(TagTrendError, ValueError):
    pass


class SingularDesignError(TagTrendError, ValueError):
    pass


class SeriesInputError(TagTrendError, ValueError):
    pass


class ConsistencyError(TagTrendError):
    pass
