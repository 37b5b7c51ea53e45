"""Input validation shared by the estimators and the CLI."""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.utils import check_scalar

from .domain import ScalarField
from .exceptions import InvalidParameterError, InvalidWindowError


def check_positive(value, name: str) -> float:
    try:
        return float(check_scalar(value, name, numbers.Real, min_val=0.0, include_boundaries="neither"))
    except (TypeError, ValueError) as exc:
        raise InvalidParameterError(str(exc)) from exc


def check_nonnegative(value, name: str) -> float:
    try:
        return float(check_scalar(value, name, numbers.Real, min_val=0.0))
    except (TypeError, ValueError) as exc:
        raise InvalidParameterError(str(exc)) from exc


def check_initial_field(f: ScalarField, name: str) -> ScalarField:
    """Initial densities must be finite, nonnegative and not identically zero."""
    if not f.is_finite():
        raise InvalidParameterError(f"{name} has non-finite values")
    if f.values.min() < 0:
        raise InvalidParameterError(f"{name} must be nonnegative")
    if not np.any(f.values > 0):
        raise InvalidParameterError(f"{name} must not vanish identically")
    return f


def parse_window(text: str) -> tuple[float, float]:
    """``"t0:t1"`` -> ``(t0, t1)`` with ``t1 > t0``."""
    try:
        a, b = text.split(":")
        window = float(a), float(b)
    except ValueError as exc:
        raise InvalidWindowError(f"window must look like t0:t1, got {text!r}") from exc
    if not window[1] > window[0]:
        raise InvalidWindowError(f"window {text!r} is empty")
    return window
