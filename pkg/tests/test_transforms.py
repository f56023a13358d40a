import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fm2i.series import minmax_scale
from fm2i.transforms import (
    ESTIMATORS,
    GCClampWarning,
    Kind,
    MatrixRepr,
    build,
    dump_csv,
    extend_for_forecast,
    extract_forecast,
    gc_matrix,
    load_csv,
    rescale,
    to_gasf,
    to_gc,
    to_gcs1,
    to_gcs2,
    to_mac,
    to_rpm,
    to_stam,
)

unit = arrays(np.float64, st.integers(3, 30), elements=st.floats(0.0, 1.0))
interior = arrays(np.float64, st.integers(3, 30), elements=st.floats(0.05, 0.95))
signed = arrays(np.float64, st.integers(3, 30), elements=st.floats(-1.0, 1.0))


def domain(kind):
    if kind in (Kind.STAM, Kind.MAC):
        return signed
    return interior if kind.gc_family else unit


def test_stam_example():
    third = 1 / 3
    np.testing.assert_allclose(to_stam([1, 1, 1]).data, [[1, 2 * third, third], [2 * third, 1, 2 * third], [third, 2 * third, 1]])
    assert not to_stam(np.zeros(4)).data.any()


def test_mac_examples():
    assert to_mac([1, 2]).data.tolist() == [[1, 2], [2, 4]]
    m = to_mac([0, 3.0]).data
    assert not m[0].any() and not m[:, 0].any()


def test_gasf_examples():
    assert to_gasf([1, 1]).data[0, 1] == pytest.approx(1)
    assert to_gasf([0, 0]).data[0, 1] == pytest.approx(-1)
    assert to_gasf([0.6, 0.8]).data[0, 1] == pytest.approx(0, abs=1e-15)
    with pytest.raises(ValueError):
        to_gasf([-0.5, 0.5])


def test_gc_examples():
    assert to_gc([0.5, 0.5]).data[0, 0] == pytest.approx(1)
    m = gc_matrix(np.array([1.0, 0.3, 0.7]))
    assert np.allclose(m[0, 1:], 0)
    assert to_gc([0.6, 0.8]).data[0, 1] == pytest.approx(0.8)


def test_gc_singularity_reported():
    with pytest.raises(ValueError, match="GC singularity"):
        gc_matrix(np.array([0.0, 0.0, 0.5]))


def test_gc_clamp_warns():
    with pytest.warns(GCClampWarning):
        m = to_gc([0.0, 0.5, 1.0])
    assert np.all(np.isfinite(m.data))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        to_gc([0.2, 0.5, 0.8])


def test_symmetrizations():
    np.testing.assert_allclose(to_gcs1([0.4] * 4).data, to_gc([0.4] * 4).data)
    np.testing.assert_allclose(to_gcs2([0.4] * 4).data, to_gc([0.4] * 4).data)
    x = [0.3, 0.7]
    gc = to_gc(x).data
    a, b = gc[0, 1], gc[1, 0]
    np.testing.assert_allclose(to_gcs1(x).data, [[gc[0, 0], (a + b) / 2], [(a + b) / 2, gc[1, 1]]])
    np.testing.assert_allclose(to_gcs2(x).data, [[gc[0, 0], b], [b, gc[1, 1]]])


def test_rpm_examples():
    assert np.all(to_rpm([4, 4, 4]).data == 0.5)
    assert to_rpm([0, 1]).data.tolist() == [[0.5, 0], [1, 0.5]]


@settings(max_examples=200, deadline=None)
@given(signed)
def test_mac_diagonals_sum_to_scaled_autocorr(s):
    from fm2i.spectral import autocorr

    gamma = autocorr(s).gamma
    m = to_mac(s).data
    for k in range(s.size):
        assert np.diagonal(m, -k).sum() == pytest.approx(s.size * gamma[k], abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(unit)
def test_gasf_is_cosine_of_angle_sum(x):
    t = np.arccos(x)
    np.testing.assert_allclose(to_gasf(x).data, np.cos(t[:, None] + t[None, :]), atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(interior)
def test_gc_is_sine_ratio(x):
    t = np.arccos(x)
    expected = np.sin(t)[:, None] / np.sin(t[:, None] + t[None, :])
    np.testing.assert_allclose(to_gc(x).data, expected, rtol=1e-9)
    np.testing.assert_allclose(np.diag(to_gc(x).data), 1 / (2 * x), rtol=1e-12)


@pytest.mark.parametrize("kind", list(Kind))
def test_symmetry_flags(kind):
    x = np.random.default_rng(3).uniform(0.1, 0.9, 9)
    m = build(kind, x).data
    assert np.allclose(m, m.T) == kind.symmetric


def test_extend_counts():
    m = to_mac(np.arange(10.0))
    grown, mask = extend_for_forecast(m, 2)
    assert grown.side == 12 and (~mask).sum() == 44
    np.testing.assert_array_equal(grown.data[:10, :10], m.data)
    same, mask0 = extend_for_forecast(m, 0)
    np.testing.assert_array_equal(same.data, m.data)
    assert mask0.all()


def test_extract_examples():
    s = np.array([1.0, 2, 3, 4])
    assert extract_forecast(to_mac(s), None, s[:3], 1)[0] == pytest.approx(4)
    g = np.zeros((3, 3))
    g[2, 2] = -1
    assert extract_forecast(MatrixRepr(Kind.GASF, g, 2), None, [0.5, 0.5], 1, "diagonal")[0] == pytest.approx(0, abs=1e-15)
    gc = np.ones((3, 3))
    assert extract_forecast(MatrixRepr(Kind.GC, gc, 2), None, [0.5, 0.5], 1)[0] == pytest.approx(0.5)


def test_extract_zero_horizon_and_shape_check():
    s = np.array([0.1, 0.2, 0.3])
    assert extract_forecast(to_mac(s), None, s, 0).size == 0
    with pytest.raises(ValueError):
        extract_forecast(to_mac(s), None, s, 1)


@pytest.mark.parametrize("kind", list(Kind))
def test_extract_consistency_exact_matrix(kind):
    @settings(max_examples=150, deadline=None)
    @given(domain(kind), st.integers(1, 6))
    def check(full, h):
        if full.size - h < 2:
            return
        if kind is Kind.STAM and h > full.size - h:
            # back-substitution needs every new lag to pair with known values
            return
        if kind is Kind.STAM and abs(full[0]) < 0.1:
            full = np.concatenate(([0.5], full[1:]))
        n1 = full.size - h
        if kind is Kind.MAC and not np.any(np.abs(full[:n1]) > 1e-3):
            # s and -s share one outer product; only the known part fixes the sign
            return
        out, paths = extract_forecast(build(kind, full), None, full[:n1], h, return_paths=True)
        assert len(paths) == h
        np.testing.assert_allclose(out, full[n1:], atol=1e-6)

    check()


@pytest.mark.parametrize("kind", list(Kind))
@pytest.mark.parametrize("est", ["auto", "alt"])
def test_extract_through_rescale(kind, est):
    rng = np.random.default_rng(7)
    lo, hi = (-1, 1) if kind in (Kind.STAM, Kind.MAC) else ((0.05, 0.95) if kind.gc_family else (0, 1))
    full, _ = minmax_scale(rng.normal(size=20), lo, hi)
    if kind is Kind.STAM:
        full[0] = 0.7
    estimator = est if est == "auto" else ESTIMATORS[kind][-1]
    scaled, ctx = rescale(build(kind, full))
    out = extract_forecast(scaled, ctx, full[:17], 3, estimator)
    np.testing.assert_allclose(out, full[17:], atol=1e-6)


def test_stam_constant_fallback():
    x = np.array([0.0, 0.4, -0.2, 0.1])
    grown, _ = extend_for_forecast(to_stam(x), 2)
    out, paths = extract_forecast(grown, None, x, 2, return_paths=True)
    assert paths == ["constant", "constant"] and np.all(out == x[-1])


def test_unknown_estimator():
    with pytest.raises(ValueError):
        extract_forecast(to_mac([0.1, 0.2, 0.3]), None, [0.1, 0.2], 1, "median")


def test_csv_round_trip(tmp_path):
    m = to_gasf(np.random.default_rng(0).uniform(0, 1, 7))
    dump_csv(m, tmp_path / "m.csv")
    np.testing.assert_array_equal(load_csv(tmp_path / "m.csv"), m.data)


def test_kind_parse():
    assert Kind.parse("gcs1") is Kind.GCS1
    with pytest.raises(ValueError):
        Kind.parse("nope")
    assert not math.isnan(rescale(to_mac([1.0, 1.0]))[0].data[0, 0])


@pytest.mark.parametrize("kind", [Kind.GC, Kind.GCS1, Kind.GCS2])
def test_cross_estimator_exact(kind):
    @settings(max_examples=150, deadline=None)
    @given(interior, st.integers(1, 4))
    def check(full, h):
        n1 = full.size - h
        if n1 < 2:
            return
        grown = build(kind, full).data.copy()
        grown[np.arange(n1, full.size), np.arange(n1, full.size)] = 0.0  # diagonal unusable
        out, paths = extract_forecast(MatrixRepr(kind, grown, n1), None, full[:n1], h, "cross", return_paths=True)
        assert set(paths) == {"cross"}
        np.testing.assert_allclose(out, full[n1:], atol=1e-6)

    check()
