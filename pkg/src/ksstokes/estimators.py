"""scikit-learn style wrappers: a scenario simulator and an exponential-decay regressor."""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_consistent_length, check_is_fitted

from .diagnostics import fit_rate
from .exceptions import InvalidParameterError
from .model import SimState
from .scenario_io.config import preset_config
from .scenario_io.runner import run
from .timestepper import advance_to
from .validation import check_initial_field, check_nonnegative, check_positive


class KellerSegelStokes(BaseEstimator):
    """Simulate a preset scenario, optionally from caller-supplied initial data.

    Parameters mirror the preset keys most often varied; ``overrides`` takes
    any further ``key=value`` strings understood by the config parser.
    ``fit(X)`` accepts ``None`` (use the preset's initial data) or a
    :class:`SimState`.
    """

    def __init__(self, preset: str = "smalldata_rho", t_end: Optional[float] = None,
                 dt: Optional[float] = None, sample_interval: Optional[float] = None,
                 alpha: Optional[float] = None, c_s: Optional[float] = None, seed: int = 0,
                 overrides: tuple = ()):
        self.preset = preset
        self.t_end = t_end
        self.dt = dt
        self.sample_interval = sample_interval
        self.alpha = alpha
        self.c_s = c_s
        self.seed = seed
        self.overrides = overrides

    def _config(self):
        items = [f"seed={int(self.seed)}", *self.overrides]
        if self.t_end is not None:
            items.append(f"t_end={check_positive(self.t_end, 't_end')!r}")
        if self.dt is not None:
            items.append(f"control.dt={check_positive(self.dt, 'dt')!r}")
        if self.sample_interval is not None:
            items.append(f"sample_interval={check_positive(self.sample_interval, 'sample_interval')!r}")
        if self.alpha is not None:
            items.append(f"model.alpha={check_nonnegative(self.alpha, 'alpha')!r}")
        if self.c_s is not None:
            items.append(f"model.c_s={check_nonnegative(self.c_s, 'c_s')!r}")
        return preset_config(self.preset, items)

    def fit(self, X: Optional[SimState] = None, y=None):
        cfg = self._config()
        if X is None:
            summary = run(cfg)
            if summary.error:
                raise InvalidParameterError(summary.error)
            self.state_ = summary.final_state
            self.history_ = summary.history
            self.summary_ = summary
            return self
        if not isinstance(X, SimState):
            raise InvalidParameterError("X must be a SimState or None")
        for name in ("rho", "m", "c"):
            check_initial_field(getattr(X, name), name)
        params, ctrl = cfg.build_params(X.grid), cfg.build_control()
        self.state_ = advance_to(X, params, ctrl, X.t + cfg.t_end)
        self.history_ = None
        self.summary_ = None
        return self


class ExponentialDecayRegressor(RegressorMixin, BaseEstimator):
    """Fit ``v(t) = A exp(-rate t)`` by least squares on ``log v`` over ``window``."""

    def __init__(self, window: Optional[tuple] = None):
        self.window = window

    def fit(self, X, y):
        t = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        y = check_array(y, ensure_2d=False, dtype=float).reshape(-1)
        check_consistent_length(t, y)
        window = self.window if self.window is not None else (float(t.min()), float(t.max()))
        res = fit_rate(zip(t, y), tuple(window))
        self.rate_ = res.rate
        self.amplitude_ = res.amplitude
        self.r_squared_ = res.r_squared
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "rate_")
        t = check_array(X, ensure_2d=False, dtype=float).reshape(-1)
        return self.amplitude_ * np.exp(-self.rate_ * t)
