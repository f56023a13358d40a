import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fm2i.spectral import autocorr, avg_power, circular_autocorr, psd, wiener_khinchin_residual

series_st = arrays(np.float64, st.integers(4, 200), elements=st.floats(-100, 100))


def brute_gamma(s):
    n1 = len(s)
    return np.array([sum(s[k] * s[k - i] for k in range(i, n1)) / n1 for i in range(n1)])


def test_autocorr_examples():
    np.testing.assert_allclose(autocorr([1, 1, 1]).gamma, [1, 2 / 3, 1 / 3])
    assert not autocorr(np.zeros(5)).gamma.any()
    assert autocorr([2]).gamma.tolist() == [4.0]


def test_avg_power_examples():
    assert avg_power([1, 1, 1]) == 1
    assert avg_power([3, 4]) == 12.5


@settings(max_examples=200, deadline=None)
@given(series_st)
def test_autocorr_matches_brute_force(s):
    g = autocorr(s).gamma
    np.testing.assert_allclose(g, brute_gamma(s), rtol=1e-9, atol=1e-9 * max(1.0, float(np.dot(s, s))))
    assert g[0] == avg_power(s)


def test_psd_constant_in_dc_bin():
    d = psd(np.full(16, 3.0)).density
    assert d[0] > 0 and np.allclose(d[1:], 0)


def test_psd_sinusoid_peaks():
    n, k = 64, 5
    t = np.arange(n)
    d = psd(np.sin(2 * np.pi * k * t / n)).density
    assert set(np.argsort(d)[-2:]) == {k, n - k}


@settings(max_examples=200, deadline=None)
@given(series_st)
def test_parseval(s):
    d = psd(s).density
    energy = float(np.dot(s, s))
    assert abs(d.sum() - energy) <= 1e-9 * max(energy, 1.0)


@settings(max_examples=100, deadline=None)
@given(series_st)
def test_circular_wiener_khinchin(s):
    scale = max(float(np.dot(s, s)), 1.0)
    assert wiener_khinchin_residual(s) < 1e-9 * scale


def test_circular_autocorr_brute():
    s = np.random.default_rng(1).normal(size=12)
    expected = [np.dot(s, np.roll(s, k)) for k in range(12)]
    np.testing.assert_allclose(circular_autocorr(s), np.array(expected) / 12)


def test_zero_series_residual():
    assert wiener_khinchin_residual(np.zeros(32)) == 0
    assert wiener_khinchin_residual(np.zeros(32), circular=False) == 0


def test_linear_gap_is_finite():
    # the linear estimator only matches the spectrum asymptotically; a single
    # realization does not shrink monotonically, so only sanity is asserted
    noise = np.random.default_rng(0).normal(size=1024)
    assert np.isfinite(wiener_khinchin_residual(noise, circular=False))
