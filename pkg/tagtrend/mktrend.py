"""
Mann-Kendall trend test.

S      = sum over k < j of sgn(x_j - x_k)
Var(S) = [n(n-1)(2n+5) - sum_p t_p(t_p-1)(2t_p+5)] / 18,  t_p = size of tie group p
Z      = (S - 1)/sqrt(Var)  if S > 0
         0                  if S = 0
         (S + 1)/sqrt(Var)  if S < 0

The one-sided downward p-value is Phi(Z); a downward trend is reported when
it falls below alpha. Kendall's tau uses the tie-adjusted (tau-b)
denominator sqrt(n0 * (n0 - n1)), n0 = n(n-1)/2, n1 = sum_p t_p(t_p-1)/2;
time has no ties.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from tagtrend.errors import InsufficientDataError, SeriesInputError

MIN_TEST_LENGTH = 4


@dataclass(frozen=True)
class MKResult:
    n: int
    s: int
    var_s: float
    z: float
    tau: float
    p_one_sided_down: float
    p_one_sided_up: float
    alpha: float
    trend_down: bool
    trend_up: bool
    degenerate: bool
    tie_groups: Tuple[Tuple[float, int], ...] = ()

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "S": self.s,
            "var_S": self.var_s,
            "Z": self.z,
            "tau": self.tau,
            "p_one_sided_down": self.p_one_sided_down,
            "p_one_sided_up": self.p_one_sided_up,
            "alpha": self.alpha,
            "downward_trend": self.trend_down,
            "upward_trend": self.trend_up,
            "degenerate": self.degenerate,
            "tie_groups": [[v, t] for v, t in self.tie_groups],
        }


def _as_series(series: Sequence[float], min_n: int) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1:
        raise SeriesInputError("series must be one-dimensional")
    if x.size < min_n:
        raise InsufficientDataError(f"need at least {min_n} observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise SeriesInputError("series contains non-finite values")
    return x


def _sign_rows(x: np.ndarray) -> np.ndarray:
    """Row k holds sum over j > k of sgn(x_j - x_k)."""
    signs = np.sign(x[None, :] - x[:, None]).astype(np.int64)
    return np.triu(signs, k=1).sum(axis=1)


def _tie_term(t: int) -> int:
    return t * (t - 1) * (2 * t + 5)


def mk_s(series: Sequence[float]) -> int:
    x = _as_series(series, 2)
    return int(_sign_rows(x).sum())


def tie_groups(series: Sequence[float]) -> List[Tuple[float, int]]:
    counts = Counter(np.asarray(series, dtype=float).tolist())
    return sorted((v, t) for v, t in counts.items() if t >= 2)


def mk_var(series: Sequence[float]) -> float:
    x = _as_series(series, 2)
    n = x.size
    ties = sum(_tie_term(t) for _, t in tie_groups(x))
    return (n * (n - 1) * (2 * n + 5) - ties) / 18


def _finish(n: int, s: int, tie_sum: int, tie_pairs: int,
            groups: Tuple[Tuple[float, int], ...], alpha: float) -> MKResult:
    var_s = (n * (n - 1) * (2 * n + 5) - tie_sum) / 18
    n0 = n * (n - 1) // 2
    if var_s <= 0:
        return MKResult(n=n, s=s, var_s=0.0, z=0.0, tau=0.0,
                        p_one_sided_down=0.5, p_one_sided_up=0.5, alpha=alpha,
                        trend_down=False, trend_up=False, degenerate=True, tie_groups=groups)

    sd = math.sqrt(var_s)
    if s > 0:
        z = (s - 1) / sd
    elif s < 0:
        z = (s + 1) / sd
    else:
        z = 0.0
    tau = s / math.sqrt(n0 * (n0 - tie_pairs))
    p_down = float(norm.cdf(z))
    p_up = float(norm.sf(z))
    return MKResult(n=n, s=s, var_s=var_s, z=z, tau=tau,
                    p_one_sided_down=p_down, p_one_sided_up=p_up, alpha=alpha,
                    trend_down=p_down < alpha, trend_up=p_up < alpha,
                    degenerate=False, tie_groups=groups)


def mk_test(series: Sequence[float], alpha: float = 0.05) -> MKResult:
    """
    Mann-Kendall test with tie-corrected variance and the +-1 continuity
    correction. A constant series is degenerate: Z = 0, p = 0.5, no trend.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    x = _as_series(series, MIN_TEST_LENGTH)
    n = x.size
    s = int(_sign_rows(x).sum())
    groups = tuple(tie_groups(x))
    tie_sum = sum(_tie_term(t) for _, t in groups)
    tie_pairs = sum(t * (t - 1) // 2 for _, t in groups)
    return _finish(n, s, tie_sum, tie_pairs, groups, alpha)


def mk_suffix_scan(series: Sequence[float], alpha: float = 0.05,
                   min_n: int = MIN_TEST_LENGTH) -> List[MKResult]:
    """
    mk_test on every suffix series[i:] with at least `min_n` points, i = 0, 1, ...
    Element i of the result equals mk_test(series[i:], alpha). The sign
    matrix is built once and the tie bookkeeping is updated incrementally.
    """
    if min_n < MIN_TEST_LENGTH:
        raise ValueError(f"min_n must be >= {MIN_TEST_LENGTH}")
    x = _as_series(series, 1)
    n = x.size
    if n < min_n:
        return []
    s_from = np.cumsum(_sign_rows(x)[::-1])[::-1]

    counts: Counter = Counter()
    tie_sum = 0
    tie_pairs = 0
    out: List[MKResult] = []
    for i in range(n - 1, -1, -1):
        v = float(x[i])
        c = counts[v]
        tie_sum += _tie_term(c + 1) - _tie_term(c)
        tie_pairs += c
        counts[v] = c + 1
        m = n - i
        if m < min_n:
            continue
        groups = tuple(sorted((val, t) for val, t in counts.items() if t >= 2))
        out.append(_finish(m, int(s_from[i]), tie_sum, tie_pairs, groups, alpha))
    out.reverse()
    return out
