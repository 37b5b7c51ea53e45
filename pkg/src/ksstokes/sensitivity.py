"""Chemotactic sensitivity tensor S(x, rho, c) = cutoff(x) * C_S (1 + rho)^-alpha * R.

R is a fixed rotation, so the operator norm of S equals its scalar prefactor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .exceptions import InvalidParameterError


def rotation_matrix(ndim: int, angle: float, axis: Sequence[float] = (1.0, 1.0, 1.0)) -> np.ndarray:
    """Rotation by ``angle``; in 3D about ``axis`` (Rodrigues formula)."""
    cos, sin = math.cos(angle), math.sin(angle)
    if ndim == 2:
        return np.array([[cos, -sin], [sin, cos]])
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + sin * K + (1.0 - cos) * (K @ K)


def smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


@dataclass(frozen=True)
class SensitivityTensor:
    c_s: float = 1.0
    alpha: float = 0.0
    rotation_angle: float = 0.0
    cutoff_eta: Optional[float] = None
    rotation_axis: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        # c_s == 0 switches chemotaxis off (homogeneous oracle preset).
        if not (self.c_s >= 0 and math.isfinite(self.c_s)):
            raise InvalidParameterError(f"c_s must be >= 0, got {self.c_s}")
        if not (self.alpha >= 0 and math.isfinite(self.alpha)):
            raise InvalidParameterError("alpha must be ≥ 0")
        if not math.isfinite(self.rotation_angle):
            raise InvalidParameterError("rotation_angle must be finite")
        if self.cutoff_eta is not None and not (0.0 < self.cutoff_eta < 1.0):
            raise InvalidParameterError(f"cutoff_eta must lie in (0, 1), got {self.cutoff_eta}")
        if np.linalg.norm(self.rotation_axis) == 0:
            raise InvalidParameterError("rotation_axis must be nonzero")

    def rotation(self, ndim: int) -> np.ndarray:
        return _rotation_cached(ndim, self.rotation_angle, tuple(self.rotation_axis))

    def cutoff(self, coords: Sequence[np.ndarray], lengths: Sequence[float]) -> np.ndarray | float:
        """Boundary multiplier in [0, 1]: 0 within eta*L_min of the wall, 1 beyond 2*eta*L_min."""
        if self.cutoff_eta is None:
            return 1.0
        width = self.cutoff_eta * min(lengths)
        dist = distance_to_boundary(coords, lengths)
        return smoothstep((dist - width) / width)

    def magnitude(self, coords, lengths, rho) -> np.ndarray:
        """Scalar prefactor, i.e. the operator norm of S at each point."""
        rho = np.asarray(rho, dtype=float)
        base = self.c_s * (1.0 + rho) ** (-self.alpha) if self.alpha else np.full_like(rho, self.c_s)
        return self.cutoff(coords, lengths) * base

    def norm_bound(self, rho) -> np.ndarray:
        return self.c_s * (1.0 + np.asarray(rho, dtype=float)) ** (-self.alpha)


def distance_to_boundary(coords: Sequence[np.ndarray], lengths: Sequence[float]) -> np.ndarray:
    dist = None
    for x, L in zip(coords, lengths):
        d = np.minimum(x, L - x)
        dist = d if dist is None else np.minimum(dist, d)
    return dist


@lru_cache(maxsize=32)
def _rotation_cached(ndim, angle, axis):
    R = rotation_matrix(ndim, angle, axis)
    R.setflags(write=False)
    return R


def eval_sensitivity(S: SensitivityTensor, x: Sequence[float], lengths: Sequence[float],
                     rho_val: float, c_val: float = 0.0) -> np.ndarray:
    """Full matrix S(x, rho, c) at a single point. ``c_val`` is accepted for
    signature parity; the implemented family does not depend on c."""
    if rho_val < 0:
        raise InvalidParameterError(f"rho_val must be >= 0, got {rho_val}")
    ndim = len(x)
    coords = tuple(np.asarray(float(xi)) for xi in x)
    scale = float(S.magnitude(coords, lengths, rho_val))
    return scale * S.rotation(ndim)
