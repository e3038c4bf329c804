"""
Augmented Dickey-Fuller test (constant-only regression) and the forward scan
for the first suffix of a series that tests stationary.

ADF regression, fitted by OLS over t = p+1 .. N-1:

    dy_t = a + g * y_{t-1} + sum_{i=1..p} d_i * dy_{t-i} + e_t

tau = g_hat / SE(g_hat); the unit root is rejected when tau falls below the
Dickey-Fuller critical value, interpolated linearly in 1/n from the
classical finite-sample table (n = effective sample size).

Lag policies:
  "auto"     p = floor(12 * (N/100)^(1/4)), capped so n_used >= 10
  "schwert"  same as "auto"
  "aic"      p chosen by AIC over 0..the "auto" lag on a common sample,
             then refitted on the full sample
  int        fixed p
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import solve_triangular

from tagtrend.config import ALPHA_LEVELS, LAG_POLICIES
from tagtrend.console import get_logger
from tagtrend.errors import ConsistencyError, InsufficientDataError, SeriesInputError, SingularDesignError
from tagtrend.rulemine import SupportSeries

log = get_logger(__name__)

MIN_EFFECTIVE_SAMPLE = 10

# Dickey-Fuller, constant only: rows are sample sizes, inf last.
_DF_SIZES = (25, 50, 100, 250, 500, math.inf)
DF_CRITICAL_VALUES = dict(zip(ALPHA_LEVELS, (
    (-3.75, -3.58, -3.51, -3.46, -3.44, -3.43),
    (-3.00, -2.93, -2.89, -2.88, -2.87, -2.86),
    (-2.62, -2.60, -2.58, -2.57, -2.57, -2.57),
)))


# -----------------------------
# OLS
# -----------------------------
@dataclass(frozen=True)
class OLSFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    residual_variance: float
    residuals: np.ndarray
    dof: int

    @property
    def ssr(self) -> float:
        return float(self.residuals @ self.residuals)


def _qr_checked(X: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    Q, R = np.linalg.qr(X)
    diag = np.abs(np.diag(R))
    tol = max(X.shape) * np.finfo(float).eps * (diag.max() if diag.size else 0.0)
    if diag.size == 0 or np.any(diag <= tol):
        raise SingularDesignError("design matrix is rank deficient")
    return Q, R


def ols_fit(design_matrix, response) -> OLSFit:
    """
    Least squares through a QR decomposition. Standard errors are
    sqrt(s^2 * diag((X'X)^-1)) with (X'X)^-1 = R^-1 R^-T and s^2 = SSR/(rows - cols).
    """
    X = np.asarray(design_matrix, dtype=float)
    y = np.asarray(response, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    rows, cols = X.shape
    if y.shape != (rows,):
        raise ValueError(f"response has shape {y.shape}, expected ({rows},)")
    if rows < cols + 1:
        raise InsufficientDataError(f"need at least {cols + 1} rows for {cols} columns, got {rows}")

    Q, R = _qr_checked(X)
    beta = solve_triangular(R, Q.T @ y)
    resid = y - X @ beta
    dof = rows - cols
    s2 = float(resid @ resid) / dof
    r_inv = solve_triangular(R, np.eye(cols))
    se = np.sqrt(s2 * np.sum(r_inv ** 2, axis=1))
    return OLSFit(coefficients=beta, standard_errors=se, residual_variance=s2, residuals=resid, dof=dof)


# -----------------------------
# ADF
# -----------------------------
@dataclass(frozen=True)
class ADFResult:
    n_obs: int
    n_used: int
    lags: int
    tau_stat: float
    critical_value: float
    critical_5pct: float
    level: float
    reject_unit_root: bool
    degenerate: bool = False
    regression_kind: str = "c"
    gamma: float = float("nan")
    error: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "n_obs": self.n_obs,
            "n_used": self.n_used,
            "lags": self.lags,
            "tau_stat": self.tau_stat,
            "critical_value": self.critical_value,
            "critical_5pct": self.critical_5pct,
            "level": self.level,
            "reject_unit_root": self.reject_unit_root,
            "degenerate": self.degenerate,
            "regression_kind": self.regression_kind,
            "error": self.error,
        }


def critical_value(n: int, level: float = 0.05) -> float:
    """
    Constant-only Dickey-Fuller critical value for effective sample size n,
    linear in 1/n between table rows; below n = 25 the 25-50 segment is
    extended.
    """
    if level not in DF_CRITICAL_VALUES:
        raise ValueError(f"critical values exist for levels {sorted(DF_CRITICAL_VALUES)}, got {level}")
    if n <= 0:
        raise ValueError(f"sample size must be positive, got {n}")
    cvs = DF_CRITICAL_VALUES[level]
    xs = np.array([1.0 / s for s in _DF_SIZES])[::-1]  # 0, 1/500, ..., 1/25
    ys = np.array(cvs)[::-1]
    x = 1.0 / n
    if x > xs[-1]:
        slope = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
        return float(ys[-1] + slope * (x - xs[-1]))
    return float(np.interp(x, xs, ys))


def schwert_lags(n: int) -> int:
    p = int(math.floor(12 * (n / 100.0) ** 0.25))
    return max(0, min(p, n - 1 - MIN_EFFECTIVE_SAMPLE))


def min_length(lags: Union[str, int] = "auto") -> int:
    """Shortest series adf_test accepts under a lag policy."""
    if lags in LAG_POLICIES:
        return MIN_EFFECTIVE_SAMPLE + 1
    p = int(lags)
    return max(p + MIN_EFFECTIVE_SAMPLE, 2 * p + 4)


def _adf_design(y: np.ndarray, p: int, start: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Regressors [1, y_{t-1}, dy_{t-1}..dy_{t-p}] and response dy_t for
    difference indices t = start..N-2 (dy_t = y_{t+1} - y_t); start >= p.
    """
    dy = np.diff(y)
    idx = np.arange(start, dy.size)
    cols = [np.ones(idx.size), y[idx]]
    cols += [dy[idx - i] for i in range(1, p + 1)]
    return np.column_stack(cols), dy[idx]


def _aic_lag(y: np.ndarray, maxlag: int) -> int:
    """AIC-best lag on the common sample; nested models share one QR."""
    X, resp = _adf_design(y, maxlag, maxlag)
    n = resp.size
    Q, _ = _qr_checked(X)
    qty = Q.T @ resp
    total = float(resp @ resp)
    best, best_aic = 0, math.inf
    for p in range(maxlag + 1):
        k = p + 2
        ssr = max(total - float(np.sum(qty[:k] ** 2)), np.finfo(float).tiny)
        aic = n * math.log(ssr / n) + 2 * k
        if aic < best_aic - 1e-12:
            best, best_aic = p, aic
    return best


def _degenerate(n: int, p: int, level: float, message: str) -> ADFResult:
    n_used = n - p - 1
    return ADFResult(n_obs=n, n_used=n_used, lags=p, tau_stat=float("nan"),
                     critical_value=critical_value(max(n_used, 1), level),
                     critical_5pct=critical_value(max(n_used, 1), 0.05),
                     level=level, reject_unit_root=False, degenerate=True, error=message)


def adf_test(series: Sequence[float], lags: Union[str, int] = "auto", level: float = 0.05) -> ADFResult:
    """
    Constant-only ADF test. A singular regression (for example a constant
    series) is reported as degenerate and never rejects.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise SeriesInputError("series must be one-dimensional")
    if not np.all(np.isfinite(y)):
        raise SeriesInputError("series contains non-finite values")
    n = y.size
    if n < min_length(lags):
        raise InsufficientDataError(f"ADF needs at least {min_length(lags)} observations, got {n}")

    if lags in LAG_POLICIES:
        maxlag = schwert_lags(n)
        if lags != "aic":
            p = maxlag
        else:
            try:
                p = _aic_lag(y, maxlag)
            except SingularDesignError as e:
                return _degenerate(n, maxlag, level, str(e))
    else:
        p = int(lags)

    X, resp = _adf_design(y, p, p)
    try:
        fit = ols_fit(X, resp)
    except SingularDesignError as e:
        return _degenerate(n, p, level, str(e))

    gamma = float(fit.coefficients[1])
    se = float(fit.standard_errors[1])
    if not se > 0 or not math.isfinite(se):
        return _degenerate(n, p, level, "zero residual variance")
    tau = gamma / se
    n_used = resp.size
    if n_used != n - p - 1:
        raise ConsistencyError(f"effective sample {n_used} != {n} - {p} - 1")
    cv = critical_value(n_used, level)
    return ADFResult(n_obs=n, n_used=n_used, lags=p, tau_stat=tau,
                     critical_value=cv, critical_5pct=critical_value(n_used, 0.05),
                     level=level, reject_unit_root=tau < cv, gamma=gamma)


# -----------------------------
# Forward scan
# -----------------------------
@dataclass(frozen=True)
class StationarityScan:
    stationary: bool
    per_offset_results: Tuple[ADFResult, ...]
    start_offset: Optional[int] = None
    start_week: Optional[int] = None
    weeks_before_submission: Optional[int] = None
    too_short: bool = False
    alpha: float = 0.05

    @property
    def n_degenerate(self) -> int:
        return sum(1 for r in self.per_offset_results if r.degenerate)

    def as_dict(self) -> dict:
        return {
            "stationary": self.stationary,
            "start_offset": self.start_offset,
            "start_week": self.start_week,
            "weeks_before_submission": self.weeks_before_submission,
            "too_short": self.too_short,
            "alpha": self.alpha,
            "n_offsets_tested": len(self.per_offset_results),
            "n_degenerate": self.n_degenerate,
        }


def find_stationarity_start(series: Sequence[float], alpha: float = 0.05,
                            lags: Union[str, int] = "auto") -> StationarityScan:
    """
    Run adf_test on series[k-1:] for k = 1, 2, ... and return the first k
    that rejects the unit root. Stops, not stationary, once the suffix is
    shorter than the ADF minimum.
    """
    y = np.asarray(series, dtype=float)
    need = min_length(lags)
    if y.size < need:
        return StationarityScan(stationary=False, per_offset_results=(), too_short=True, alpha=alpha)

    results: List[ADFResult] = []
    for k in range(1, y.size - need + 2):
        try:
            res = adf_test(y[k - 1:], lags=lags, level=alpha)
        except (InsufficientDataError, SingularDesignError) as e:
            res = _degenerate(y.size - k + 1, 0, alpha, str(e))
        results.append(res)
        if res.reject_unit_root:
            return StationarityScan(stationary=True, per_offset_results=tuple(results),
                                    start_offset=k, alpha=alpha)
    return StationarityScan(stationary=False, per_offset_results=tuple(results), alpha=alpha)


def analyze_series(series: SupportSeries, alpha: float = 0.05,
                   lags: Union[str, int] = "auto") -> StationarityScan:
    scan = find_stationarity_start(series.values, alpha=alpha, lags=lags)
    if scan.stationary:
        start_week = series.first_week + scan.start_offset - 1
        scan = replace(scan, start_week=start_week,
                       weeks_before_submission=series.submission_week - start_week)
    log.debug("%s %s: stationary=%s offset=%s", series.proposal_id, series.rule, scan.stationary, scan.start_offset)
    return scan
