"""
Onset of convergence for a support series.

For a series L of length N the suffix statistic V[i] = var(L[i..N]) is
computed for i = 1..N-1 (each slice has at least two points). Scanning
i = 1, 2, ..., the Mann-Kendall test is run on V[i..N-1]; the first i whose
one-sided downward p-value is below alpha with tau < 0 is the convergence
start. The scan stops once fewer than four suffix values remain.

Indices in ConvergenceResult are 1-based to match the week offsets reported
downstream (start_week = first_week + start_index - 1).
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from tagtrend.console import get_logger
from tagtrend.errors import ConsistencyError, InsufficientDataError, SeriesInputError
from tagtrend.mktrend import MIN_TEST_LENGTH, MKResult, mk_suffix_scan
from tagtrend.rulemine import SupportSeries

log = get_logger(__name__)

MIN_SERIES_LENGTH = MIN_TEST_LENGTH + 3  # N - 1 suffix values, first MK call sees >= 4
DEFAULT_ALPHA = 0.05
STATISTICS = ("variance", "std")


@dataclass(frozen=True)
class ConvergenceResult:
    converged: bool
    alpha: float
    suffix_stats: Tuple[float, ...]
    start_index: Optional[int] = None
    start_week: Optional[int] = None
    weeks_before_submission: Optional[int] = None
    too_short: bool = False
    statistic: str = "variance"
    mk: Optional[MKResult] = None

    @property
    def starts_at_first(self) -> bool:
        """Converging from the first observation; reported as-is but flagged."""
        return self.start_index == 1

    def as_dict(self) -> dict:
        return {
            "converged": self.converged,
            "start_index": self.start_index,
            "start_week": self.start_week,
            "weeks_before_submission": self.weeks_before_submission,
            "starts_at_first": self.starts_at_first,
            "too_short": self.too_short,
            "alpha": self.alpha,
            "statistic": self.statistic,
            "mk": self.mk.as_dict() if self.mk else None,
        }


def _validate(series: Sequence[float]) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise SeriesInputError("series must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise SeriesInputError("series contains non-finite values")
    return x


def suffix_variances(series: Sequence[float], ddof: int = 1) -> np.ndarray:
    """
    V[i] = variance of series[i:] for every suffix with at least two points
    (sample variance by default). Constant slices give exactly 0.
    """
    x = _validate(series)
    n = x.size
    if n < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {n}")
    out = np.empty(n - 1)
    for i in range(n - 1):
        tail = x[i:]
        out[i] = 0.0 if tail.max() == tail.min() else tail.var(ddof=ddof)
    return out


def find_converge_start(series: Sequence[float],
                        alpha: float = DEFAULT_ALPHA,
                        statistic: str = "variance") -> ConvergenceResult:
    """
    Earliest 1-based index from which the suffix variances trend downward.
    Series shorter than MIN_SERIES_LENGTH come back not converged and
    flagged `too_short`.
    """
    if statistic not in STATISTICS:
        raise ValueError(f"statistic must be one of {STATISTICS}, got {statistic!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    x = _validate(series)
    if x.size < MIN_SERIES_LENGTH:
        stats = tuple(suffix_variances(x)) if x.size >= 2 else ()
        return ConvergenceResult(converged=False, alpha=alpha, suffix_stats=stats,
                                 too_short=True, statistic=statistic)

    v = suffix_variances(x)
    if statistic == "std":
        v = np.sqrt(v)

    for i, res in enumerate(mk_suffix_scan(v, alpha=alpha)):
        if res.p_one_sided_down < alpha and res.tau < 0:
            return ConvergenceResult(converged=True, alpha=alpha, suffix_stats=tuple(v.tolist()),
                                     start_index=i + 1, statistic=statistic, mk=res)
    return ConvergenceResult(converged=False, alpha=alpha, suffix_stats=tuple(v.tolist()),
                             statistic=statistic)


def to_weeks_before_submission(result: ConvergenceResult, series_meta: SupportSeries) -> ConvergenceResult:
    """Place a converged result on the week clock of its series."""
    if not result.converged or result.start_index is None:
        raise ValueError("only converged results carry an onset week")
    start_week = series_meta.first_week + result.start_index - 1
    if start_week > series_meta.submission_week:
        raise ConsistencyError(
            f"onset week {start_week} lies after submission week {series_meta.submission_week}"
        )
    return replace(result, start_week=start_week,
                   weeks_before_submission=series_meta.submission_week - start_week)


def analyze_series(series: SupportSeries, alpha: float = DEFAULT_ALPHA,
                   statistic: str = "variance") -> ConvergenceResult:
    res = find_converge_start(series.values, alpha=alpha, statistic=statistic)
    if res.converged:
        res = to_weeks_before_submission(res, series)
    log.debug("%s %s: converged=%s start=%s", series.proposal_id, series.rule, res.converged, res.start_index)
    return res
