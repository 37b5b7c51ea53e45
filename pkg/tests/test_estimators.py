import numpy as np
import pytest
from sklearn.base import clone

from ksstokes.domain import Grid
from ksstokes.estimators import ExponentialDecayRegressor, KellerSegelStokes
from ksstokes.exceptions import InvalidParameterError, InvalidWindowError
from ksstokes.model import SimState
from ksstokes.validation import check_initial_field, check_nonnegative, check_positive, parse_window


class TestKellerSegelStokes:
    def test_params_round_trip(self):
        est = KellerSegelStokes(preset="balanced", t_end=0.5, alpha=0.7)
        params = est.get_params()
        assert params["preset"] == "balanced" and params["alpha"] == 0.7
        assert clone(est).get_params() == params
        est.set_params(t_end=0.2)
        assert est.t_end == 0.2

    def test_fit_preset(self):
        est = KellerSegelStokes(preset="bounded_regime", t_end=0.2, overrides=("grid.dims=[16, 16]",)).fit()
        assert est.state_.t == pytest.approx(0.2)
        assert len(est.history_) == 3
        assert est.summary_.exit_code == 0

    def test_fit_from_state(self):
        g = Grid((16, 16))
        x = g.cell_centers()[0]
        X = SimState.from_arrays(g, 1.0 + 0.1 * np.cos(np.pi * x), 0.5, 0.2)
        est = KellerSegelStokes(preset="balanced", t_end=0.1, overrides=("grid.dims=[16, 16]",)).fit(X)
        assert est.state_.t == pytest.approx(0.1)
        assert est.history_ is None

    def test_invalid_inputs(self):
        with pytest.raises(InvalidParameterError):
            KellerSegelStokes(dt=-1.0).fit()
        with pytest.raises(InvalidParameterError):
            KellerSegelStokes(alpha=-0.5).fit()
        with pytest.raises(InvalidParameterError):
            KellerSegelStokes(preset="balanced").fit(X="not a state")
        with pytest.raises(InvalidParameterError):
            KellerSegelStokes(preset="balanced").fit(SimState.rest(Grid((8, 8))))


class TestExponentialDecayRegressor:
    def test_fit_predict_score(self):
        t = np.linspace(0, 4, 40)
        y = 3.0 * np.exp(-0.8 * t)
        reg = ExponentialDecayRegressor().fit(t, y)
        assert reg.rate_ == pytest.approx(0.8)
        assert reg.amplitude_ == pytest.approx(3.0)
        assert np.allclose(reg.predict(t), y)
        assert reg.score(t, y) == pytest.approx(1.0)

    def test_window_and_errors(self):
        t = np.linspace(0, 4, 40)
        y = np.exp(-t)
        assert ExponentialDecayRegressor(window=(1.0, 3.0)).fit(t, y).rate_ == pytest.approx(1.0)
        with pytest.raises(ValueError):
            ExponentialDecayRegressor().fit(t, y[:-1])
        with pytest.raises(InvalidWindowError):
            ExponentialDecayRegressor(window=(0, 0.1)).fit(t, y)
        with pytest.raises(Exception):
            ExponentialDecayRegressor().predict(t)


class TestValidation:
    def test_scalars(self):
        assert check_positive(2, "x") == 2.0
        assert check_nonnegative(0, "x") == 0.0
        with pytest.raises(InvalidParameterError):
            check_positive(0.0, "x")
        with pytest.raises(InvalidParameterError):
            check_nonnegative(-1, "x")
        with pytest.raises(InvalidParameterError):
            check_positive("a", "x")

    def test_initial_field(self):
        g = Grid((8, 8))
        s = SimState.from_arrays(g, 1.0, 0.0, np.nan)
        assert check_initial_field(s.rho, "rho") is s.rho
        with pytest.raises(InvalidParameterError, match="vanish"):
            check_initial_field(s.m, "m")
        with pytest.raises(InvalidParameterError, match="finite"):
            check_initial_field(s.c, "c")

    def test_window(self):
        assert parse_window("0.5:2") == (0.5, 2.0)
        for bad in ("2:1", "x", "1:2:3"):
            with pytest.raises(InvalidWindowError):
                parse_window(bad)
