import itertools
import math

import numpy as np
import pytest

from tagtrend.errors import InsufficientDataError, SeriesInputError
from tagtrend.mktrend import mk_s, mk_suffix_scan, mk_test, mk_var, tie_groups
from tagtrend.synthbench import brute_mk_s, rng_for


def test_s_matches_brute_force_on_all_ternary_series_of_length_8():
    for series in itertools.product((0, 1, 2), repeat=8):
        assert mk_s(series) == brute_mk_s(series)


def test_s_matches_brute_force_on_random_series():
    rng = rng_for(2024)
    for _ in range(1000):
        n = int(rng.integers(2, 51))
        # coarse integer values so ties show up often
        x = rng.integers(0, 8, n).astype(float)
        assert mk_s(x) == brute_mk_s(x.tolist())


@pytest.mark.parametrize("n", range(4, 51))
def test_variance_without_ties_has_closed_form(n):
    assert mk_var(np.arange(n)) == n * (n - 1) * (2 * n + 5) / 18


def test_small_examples():
    assert mk_s([1, 2, 3, 4, 5]) == 10
    assert mk_s([3, 3, 3, 3]) == 0
    assert mk_var([3, 3, 3, 3]) == 0
    assert mk_var([1, 2, 2, 3]) == pytest.approx(7.6667, abs=1e-4)
    assert mk_var([5, 4, 3, 2, 1]) == pytest.approx(16.6667, abs=1e-4)
    assert tie_groups([1, 2, 2, 3, 3, 3]) == [(2.0, 2), (3.0, 3)]


def test_strictly_decreasing_series_is_a_downward_trend():
    res = mk_test([5, 4, 3, 2, 1], alpha=0.05)
    assert res.s == -10
    assert res.z == pytest.approx(-2.2045, abs=1e-3)
    assert res.p_one_sided_down == pytest.approx(0.0138, abs=5e-4)
    assert res.tau == pytest.approx(-1.0)
    assert res.trend_down and not res.trend_up


def test_strictly_increasing_series_is_not_downward():
    res = mk_test([1, 2, 3, 4, 5])
    assert res.z == pytest.approx(2.2045, abs=1e-3)
    assert not res.trend_down
    assert res.trend_up


def test_constant_series_is_degenerate():
    res = mk_test([2.0] * 10)
    assert res.degenerate
    assert res.z == 0.0 and res.p_one_sided_down == 0.5
    assert not res.trend_down and not res.trend_up


def test_tau_b_denominator_with_ties():
    x = [1, 2, 2, 3]
    res = mk_test(x)
    n0 = 6
    n1 = 1
    assert res.tau == pytest.approx(res.s / math.sqrt(n0 * (n0 - n1)))


def test_rank_invariance_and_antisymmetry():
    rng = rng_for(7)
    for _ in range(50):
        x = rng.standard_normal(int(rng.integers(4, 40)))
        a = mk_test(x)
        b = mk_test(np.exp(x))
        assert (a.s, a.var_s, a.z) == (b.s, b.var_s, b.z)
        assert mk_s(x[::-1]) == -a.s
        assert mk_s(-x) == -a.s


def test_suffix_scan_equals_test_on_each_suffix():
    rng = rng_for(11)
    for _ in range(30):
        n = int(rng.integers(4, 35))
        x = rng.integers(0, 5, n).astype(float)
        scan = mk_suffix_scan(x, alpha=0.1)
        assert len(scan) == n - 3
        for i, got in enumerate(scan):
            want = mk_test(x[i:], alpha=0.1)
            assert got.n == want.n and got.s == want.s
            assert got.var_s == pytest.approx(want.var_s)
            assert got.z == pytest.approx(want.z)
            assert got.tau == pytest.approx(want.tau)
            assert got.degenerate == want.degenerate
            assert got.tie_groups == want.tie_groups


def test_suffix_scan_short_input_is_empty():
    assert mk_suffix_scan([1.0, 2.0, 3.0]) == []


def test_input_errors():
    with pytest.raises(InsufficientDataError):
        mk_test([1, 2, 3])
    with pytest.raises(SeriesInputError):
        mk_test([1, 2, float("nan"), 4])
    with pytest.raises(ValueError):
        mk_test([1, 2, 3, 4], alpha=1.5)
