import numpy as np
import pytest

from tagtrend.errors import InsufficientDataError, SingularDesignError
from tagtrend.rulemine import Rule, SupportSeries
from tagtrend.stationarity import (adf_test, analyze_series, critical_value, find_stationarity_start, min_length,
                                   ols_fit, schwert_lags)
from tagtrend.synthbench import SynthSpec, generate_values, rng_for


# -----------------------------
# OLS
# -----------------------------
def test_ols_exact_line():
    x = np.arange(5.0)
    X = np.column_stack([np.ones(5), x])
    fit = ols_fit(X, 2 * x + 1)
    np.testing.assert_allclose(fit.coefficients, [1.0, 2.0], atol=1e-12)
    assert fit.residual_variance == pytest.approx(0.0, abs=1e-20)
    assert fit.dof == 3


def test_ols_orthogonal_response_has_zero_slope():
    x = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    fit = ols_fit(np.column_stack([np.ones(5), x]), x ** 2)
    assert fit.coefficients[1] == pytest.approx(0.0, abs=1e-12)


def test_ols_matches_normal_equations():
    rng = rng_for(17)
    X = rng.standard_normal((20, 3))
    y = rng.standard_normal(20)
    fit = ols_fit(X, y)
    beta = np.linalg.solve(X.T @ X, X.T @ y)
    np.testing.assert_allclose(fit.coefficients, beta, atol=1e-8)
    s2 = np.sum((y - X @ beta) ** 2) / 17
    np.testing.assert_allclose(fit.standard_errors, np.sqrt(s2 * np.diag(np.linalg.inv(X.T @ X))), atol=1e-8)


def test_ols_rejects_rank_deficient_and_short_designs():
    X = np.column_stack([np.ones(6), np.arange(6.0), 2 * np.arange(6.0)])
    with pytest.raises(SingularDesignError):
        ols_fit(X, np.arange(6.0))
    with pytest.raises(InsufficientDataError):
        ols_fit(np.ones((2, 2)), np.ones(2))


# -----------------------------
# Critical values and lags
# -----------------------------
def test_critical_values_follow_table():
    assert critical_value(25) == pytest.approx(-3.00)
    assert critical_value(100) == pytest.approx(-2.89)
    assert critical_value(10 ** 9) == pytest.approx(-2.86, abs=1e-6)
    assert -2.93 < critical_value(75) < -2.89
    assert critical_value(12) < critical_value(25)
    assert critical_value(100, 0.01) < critical_value(100, 0.05) < critical_value(100, 0.10)
    with pytest.raises(ValueError):
        critical_value(100, 0.02)


def test_schwert_lags():
    assert schwert_lags(100) == 12
    assert schwert_lags(300) == 15
    assert schwert_lags(15) == 4
    assert min_length("auto") == min_length("aic") == 11
    assert min_length(3) == 13


# -----------------------------
# ADF
# -----------------------------
@pytest.mark.parametrize("lags", ["auto", "aic"])
def test_iid_noise_rejects_unit_root(lags):
    hits = sum(adf_test(rng_for(seed).standard_normal(300), lags=lags).reject_unit_root for seed in range(100))
    assert hits >= 95


@pytest.mark.parametrize("lags", ["auto", "aic"])
def test_random_walk_rarely_rejects(lags):
    hits = sum(adf_test(np.cumsum(rng_for(1000 + seed).standard_normal(300)), lags=lags).reject_unit_root
               for seed in range(100))
    assert hits <= 10


def test_auto_lag_is_the_schwert_rule():
    for n in (30, 100, 300):
        x = rng_for(n).standard_normal(n)
        auto = adf_test(x)
        assert auto.lags == schwert_lags(n)
        assert auto.n_used == n - schwert_lags(n) - 1
        assert adf_test(x, lags="schwert").tau_stat == auto.tau_stat
        assert adf_test(x, lags=schwert_lags(n)).tau_stat == pytest.approx(auto.tau_stat, abs=1e-12)


def test_aic_lag_stays_within_schwert_maximum():
    for seed in range(20):
        res = adf_test(rng_for(seed).standard_normal(120), lags="aic")
        assert 0 <= res.lags <= schwert_lags(120)


def test_constant_series_is_degenerate():
    res = adf_test([3.0] * 40)
    assert res.degenerate and not res.reject_unit_root


def test_effective_sample_size():
    res = adf_test(rng_for(1).standard_normal(60), lags=4)
    assert res.lags == 4
    assert res.n_used == 60 - 4 - 1


def test_too_short_for_lag():
    with pytest.raises(InsufficientDataError):
        adf_test(np.arange(12.0), lags=3)


@pytest.mark.parametrize("lags", [0, 2, "auto", "aic"])
def test_tau_is_shift_and_scale_invariant(lags):
    for seed in range(50):
        rng = rng_for(500 + seed)
        x = rng.standard_normal(120)
        if seed % 2:
            x = np.cumsum(x)
        base = adf_test(x, lags=lags)
        shifted = adf_test(x + 25.0, lags=lags)
        scaled = adf_test(4.0 * x, lags=lags)
        assert shifted.lags == base.lags == scaled.lags
        assert shifted.tau_stat == pytest.approx(base.tau_stat, abs=1e-8)
        assert scaled.tau_stat == pytest.approx(base.tau_stat, abs=1e-8)


def test_tau_matches_reference_implementation():
    stattools = pytest.importorskip("statsmodels.tsa.stattools")
    for seed in range(5):
        rng = rng_for(9000 + seed)
        x = np.cumsum(rng.standard_normal(200)) * 0.5 + rng.standard_normal(200)
        for lags in (0, 3):
            ref = stattools.adfuller(x, maxlag=lags, regression="c", autolag=None)
            assert adf_test(x, lags=lags).tau_stat == pytest.approx(ref[0], abs=0.01)
        ref = stattools.adfuller(x, maxlag=schwert_lags(200), regression="c", autolag=None)
        assert adf_test(x).tau_stat == pytest.approx(ref[0], abs=0.01)


def test_aic_lag_matches_reference_implementation():
    stattools = pytest.importorskip("statsmodels.tsa.stattools")
    # N = 100 keeps the reference search bound (a ceiling) equal to schwert_lags
    for seed in range(10):
        x = rng_for(seed).standard_normal(100)
        ref = stattools.adfuller(x, regression="c", autolag="AIC")
        aic = adf_test(x, lags="aic")
        assert aic.lags == ref[2]
        assert aic.tau_stat == pytest.approx(ref[0], abs=0.01)


# -----------------------------
# Forward scan
# -----------------------------
def test_stationary_series_starts_at_first_offset():
    scan = find_stationarity_start(rng_for(4).standard_normal(100), lags=0)
    assert scan.stationary and scan.start_offset == 1
    assert len(scan.per_offset_results) == 1


def test_explosive_series_is_never_stationary():
    x = 1.05 ** np.arange(40)
    scan = find_stationarity_start(x, lags=0)
    assert not scan.stationary
    assert scan.start_offset is None
    assert len(scan.per_offset_results) == 40 - min_length(0) + 1


def test_walk_spliced_to_noise_becomes_stationary_early():
    found = 0
    for seed in range(20):
        x = generate_values(SynthSpec("walk-to-noise", length=300, seed=seed, change_point=60))
        scan = find_stationarity_start(x, lags="aic")
        if scan.stationary and scan.start_offset <= 80:
            found += 1
    assert found >= 16


@pytest.mark.parametrize("lags", ["auto", "aic"])
def test_walk_spliced_to_noise_onset_rarely_near_change_point(lags):
    # the iid tail dominates early suffixes, so rejection comes well before the walk is dropped
    in_window = 0
    for seed in range(30):
        x = generate_values(SynthSpec("walk-to-noise", length=300, seed=seed, change_point=60))
        scan = find_stationarity_start(x, lags=lags)
        if scan.stationary and 40 <= scan.start_offset <= 80:
            in_window += 1
    assert in_window <= 3


def test_random_walk_scan_outcomes():
    never = 0
    at_first = 0
    for seed in range(30):
        x = generate_values(SynthSpec("random-walk", length=200, seed=seed))
        scan = find_stationarity_start(x)
        if not scan.stationary:
            never += 1
            assert scan.start_offset is None
            assert len(scan.per_offset_results) == 200 - min_length("auto") + 1
            assert not any(r.reject_unit_root for r in scan.per_offset_results)
        elif scan.start_offset == 1:
            at_first += 1
    # many offsets are tested, so most walks reject on some late short suffix
    assert 1 <= never <= 12
    assert at_first <= 5


def test_short_series_is_flagged():
    scan = find_stationarity_start(np.arange(8.0))
    assert scan.too_short and not scan.stationary
    assert scan.per_offset_results == ()


def test_analyze_series_maps_offset_to_week():
    x = rng_for(6).standard_normal(50)
    series = SupportSeries("P", Rule.of(None, "#a"), 10, 59, tuple(x.tolist()))
    scan = analyze_series(series, lags=0)
    assert scan.stationary
    assert scan.start_week == 10 + scan.start_offset - 1
    assert scan.weeks_before_submission == 59 - scan.start_week
