"""Independent reference solutions: homogeneous ODE, heat eigenmodes, dense semigroup.

Nothing here calls into ``operators``; the dense Laplacian is assembled
entry by entry so it can check the matrix-free stencil.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as sint

from .domain import Grid, ScalarField
from .exceptions import InvalidParameterError

DENSE_MAX_CELLS = 16


@dataclass(frozen=True)
class HomogeneousSolution:
    """Spatially constant solution of rho' = m' = -rho m, c' = m - c."""

    rho0: float
    m0: float
    c0: float

    def __post_init__(self):
        if min(self.rho0, self.m0, self.c0) < 0:
            raise InvalidParameterError("initial values must be nonnegative")

    @property
    def d(self) -> float:
        return self.rho0 - self.m0

    def m(self, t: float) -> float:
        d, m0 = self.d, self.m0
        if d == 0.0:
            return m0 / (1.0 + m0 * t)
        if d > 0:
            e = math.exp(-d * t)
            return d * m0 * e / ((d + m0) - m0 * e)
        return d * m0 / ((d + m0) * math.exp(d * t) - m0)


def homogeneous_exact(sol: HomogeneousSolution, t: float):
    """``(rho, m, c)`` at time ``t``; c by quadrature of its integrating-factor form."""
    if t < 0:
        raise InvalidParameterError("t must be >= 0")
    m = sol.m(t)
    rho = m + sol.d
    if t == 0:
        return sol.rho0, sol.m0, sol.c0
    integral, _ = sint.quad(lambda s: math.exp(s - t) * sol.m(s), 0.0, t,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    c = sol.c0 * math.exp(-t) + integral
    return rho, m, c


def homogeneous_reference_ode(sol: HomogeneousSolution, t: float):
    """Same trajectory from an adaptive Runge-Kutta integrator (cross-check only)."""
    def rhs(_, y):
        r, m, c = y
        return [-r * m, -r * m, m - c]

    out = sint.solve_ivp(rhs, (0.0, t), [sol.rho0, sol.m0, sol.c0], method="DOP853",
                         rtol=1e-12, atol=1e-14)
    return tuple(float(v) for v in out.y[:, -1])


def heat_eigenmode_reference(grid: Grid, k, t: float) -> ScalarField:
    """Product of cos(k_a pi x_a / L_a) decayed by exp(-sum (k_a pi / L_a)^2 t).

    ``k`` is an int (mode along the first axis) or a per-axis tuple.
    """
    ks = (k,) + (0,) * (grid.ndim - 1) if np.isscalar(k) else tuple(k)
    if len(ks) != grid.ndim or any(int(kk) < 0 for kk in ks) or not any(ks):
        raise InvalidParameterError(f"bad mode index {k!r}")
    values = np.ones(grid.dims)
    lam = 0.0
    for x, kk, L in zip(grid.cell_centers(), ks, grid.lengths):
        values = values * np.cos(kk * math.pi * x / L)
        lam += (kk * math.pi / L) ** 2
    return ScalarField(grid, values * math.exp(-lam * t))


def dense_neumann_laplacian(grid: Grid) -> np.ndarray:
    """Dense matrix of the compact Neumann Laplacian, built entry by entry."""
    if max(grid.dims) > DENSE_MAX_CELLS or grid.ndim > 2:
        raise InvalidParameterError(
            f"dense oracle supports 2-axis grids up to {DENSE_MAX_CELLS} cells per axis"
        )
    n = grid.size
    A = np.zeros((n, n))
    index = np.arange(n).reshape(grid.dims)
    for cell in np.ndindex(*grid.dims):
        i = index[cell]
        for a, h in enumerate(grid.spacing):
            for step in (-1, 1):
                nb = list(cell)
                nb[a] += step
                if 0 <= nb[a] < grid.dims[a]:
                    A[i, index[tuple(nb)]] += 1.0 / h**2
                    A[i, i] -= 1.0 / h**2
                # reflected ghost contributes nothing to a Neumann row
    return A


class DenseSemigroup:
    """exp(t lap_h) through a symmetric eigendecomposition."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.eigvals, self.eigvecs = np.linalg.eigh(dense_neumann_laplacian(grid))

    @property
    def lambda1(self) -> float:
        """Smallest nonzero eigenvalue of -lap_h."""
        lam = -self.eigvals
        return float(np.min(lam[lam > 1e-8 * lam.max()]))

    def apply(self, f: ScalarField, t: float) -> ScalarField:
        coeffs = self.eigvecs.T @ f.values.ravel()
        out = self.eigvecs @ (np.exp(t * self.eigvals) * coeffs)
        return ScalarField(self.grid, out.reshape(self.grid.dims))

    def eigenvector(self, which: int = 1) -> ScalarField:
        return ScalarField(self.grid, self.eigvecs[:, -1 - which].reshape(self.grid.dims))


def dense_semigroup(grid: Grid, t: float, f: ScalarField) -> ScalarField:
    return DenseSemigroup(grid).apply(f, t)
