import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from fm2i.estimators import FM2IForecaster, MatrixEncoder, SeriesScaler
from fm2i.transforms import to_gasf
from fm2i.tuner import ConfigSpace, ModelConfig, forecast
from synth import make_series


def test_scaler_params_and_clone():
    sc = SeriesScaler(lo=0.0, hi=1.0, differenced=True)
    assert sc.get_params() == {"lo": 0.0, "hi": 1.0, "differenced": True}
    assert clone(sc).get_params() == sc.get_params()
    with pytest.raises(NotFittedError):
        sc.transform([1.0, 2.0])


@pytest.mark.parametrize("differenced", [False, True])
def test_scaler_round_trip(differenced):
    y = make_series(3, "ar1", 40)
    sc = SeriesScaler(-1, 1, differenced).fit(y)
    z = sc.transform(y)
    assert z.min() == pytest.approx(-1) and z.max() == pytest.approx(1)
    np.testing.assert_allclose(sc.inverse_transform(z), y, atol=1e-9)
    np.testing.assert_allclose(sc.fit_transform(y), z)
    assert sc.record.differenced is differenced


def test_scaler_restore_forecast_continues_series():
    y = np.arange(10.0)
    sc = SeriesScaler(differenced=True).fit(y)
    # constant diffs map to the midpoint; restoring continues the ramp
    np.testing.assert_allclose(sc.restore_forecast([0.0, 0.0]), [10.0, 11.0])


def test_matrix_encoder():
    x = np.linspace(0, 1, 6)
    np.testing.assert_allclose(MatrixEncoder("gasf").fit_transform(x), to_gasf(x).data)
    assert MatrixEncoder().get_params() == {"clamp_eps": 0.05, "kind": "GASF"}


def test_forecaster_fixed_config_matches_pipeline():
    y = make_series(0, "sine", 30)
    cfg = ModelConfig("MAC", False, -1.0, 1.0, 3)
    est = FM2IForecaster(config=cfg, horizon=4).fit(y)
    np.testing.assert_array_equal(est.predict(), forecast(y, cfg, 4))
    assert est.predict(0).size == 0
    assert est.log_ is None


def test_forecaster_tunes():
    y = make_series(1, "linear", 24)
    space = ConfigSpace(kinds=("MAC",), patch_sizes=(3,))
    est = FM2IForecaster(space=space, horizon=3)
    out = est.fit_predict(y)
    assert out.shape == (3,) and np.all(np.isfinite(out))
    assert est.config_ in space.configs() and len(est.log_) > 0
    assert clone(est).get_params()["horizon"] == 3


def test_forecaster_not_fitted():
    with pytest.raises(NotFittedError):
        FM2IForecaster().predict(3)
    with pytest.raises(ValueError):
        FM2IForecaster().fit([1.0])
