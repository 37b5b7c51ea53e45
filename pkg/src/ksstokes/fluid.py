"""Incompressible Stokes flow on the collocated grid (Chorin projection)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .domain import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField
from .exceptions import InvalidParameterError, SolverError
from .operators import (
    conjugate_gradient,
    diffuse_implicit,
    divergence,
    forward_transform,
    gradient,
    inverse_transform,
    laplacian_symbol,
    spectral_shifted_solve,
    _laplacian_values,
)

PROJ_TOL = 1e-9


@dataclass
class StokesParams:
    phi: Optional[ScalarField] = None
    nu: float = 1.0
    proj_tol: float = PROJ_TOL

    def __post_init__(self):
        if self.nu != 1.0:
            raise InvalidParameterError("viscosity is fixed at 1")
        if not self.proj_tol > 0:
            raise InvalidParameterError(f"proj_tol must be > 0, got {self.proj_tol}")
        if self.phi is not None and not self.phi.is_finite():
            raise InvalidParameterError("phi must be finite")


def _solve_wide_poisson(rhs: np.ndarray, grid: Grid) -> np.ndarray:
    """Mean-zero solution of div(grad q) = rhs under Neumann data."""
    sym = laplacian_symbol(grid, "wide")
    coeffs = forward_transform(rhs, NEUMANN)
    with np.errstate(divide="ignore", invalid="ignore"):
        coeffs = np.where(sym == 0.0, 0.0, coeffs / np.where(sym == 0.0, 1.0, sym))
    return inverse_transform(coeffs, NEUMANN)


def _project(v: VectorField, refinements: int = 2, stop: float = 0.0):
    grid = v.grid
    w = VectorField(grid, tuple(c.copy() for c in v.components), DIRICHLET)
    q = np.zeros(grid.dims)
    for _ in range(1 + refinements):
        div = divergence(w).values
        if np.abs(div).max() <= stop:
            break
        dq = _solve_wide_poisson(div, grid)
        q += dq
        g = gradient(ScalarField(grid, dq, NEUMANN))
        w = VectorField(grid, tuple(wc - gc for wc, gc in zip(w.components, g.components)), DIRICHLET)
    q -= q.mean()
    w.divergence_free = True
    return w, q


def leray_project(v: VectorField, proj_tol: float = PROJ_TOL, refinements: int = 2):
    """Split ``v = w + grad q`` with ``div w = 0`` and ``mean(q) = 0``.

    Returns ``(w, q)``; ``w`` carries ``divergence_free=True``.
    """
    w, q = _project(v, refinements, stop=0.01 * proj_tol)
    residual = float(np.abs(divergence(w).values).max())
    if not residual <= proj_tol:
        raise SolverError(f"projection left divergence {residual:.3e} > {proj_tol:.1e}",
                          residual=residual)
    return w, ScalarField(v.grid, q, NEUMANN)


def buoyancy(rho: ScalarField, m: ScalarField, phi: ScalarField) -> VectorField:
    """Force (rho + m) grad(phi), pointwise."""
    if not (rho.grid == m.grid == phi.grid):
        raise InvalidParameterError("fields must share a grid")
    g = gradient(phi)
    s = rho.values + m.values
    return VectorField(rho.grid, tuple(s * c for c in g.components), DIRICHLET, False)


def stokes_step(u: VectorField, rho: ScalarField, m: ScalarField, dt: float,
                params: StokesParams):
    """One step of u_t = lap u - grad P + (rho + m) grad phi, div u = 0.

    The buoyancy is projected before the viscous solve so that a pure
    gradient force leaves the fluid at rest exactly. Returns ``(u_new, P)``.
    """
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    grid = u.grid
    pressure = np.zeros(grid.dims)
    rhs = [c.copy() for c in u.components]
    if params.phi is not None:
        force, q_force = leray_project(buoyancy(rho, m, params.phi), params.proj_tol)
        pressure += q_force.values
        rhs = [r + dt * fc for r, fc in zip(rhs, force.components)]
    star = tuple(
        diffuse_implicit(ScalarField(grid, r, DIRICHLET), dt, kappa=params.nu).values for r in rhs
    )
    u_new, q = leray_project(VectorField(grid, star, DIRICHLET), params.proj_tol)
    pressure += q.values / dt
    pressure -= pressure.mean()
    return u_new, ScalarField(grid, pressure, NEUMANN)


def _flatten(v: VectorField) -> np.ndarray:
    return np.concatenate([c.ravel() for c in v.components])


def _unflatten(x: np.ndarray, grid: Grid) -> VectorField:
    return VectorField(grid, tuple(np.split(x, grid.ndim)), DIRICHLET)


@lru_cache(maxsize=16)
def stokes_eigenvalue(grid: Grid, tol: float = 1e-11, maxiter: int = 500, seed: int = 0) -> float:
    """First eigenvalue of the discrete Stokes operator -P lap_D P.

    Inverse power iteration on the divergence-free subspace, inner solves by
    CG preconditioned with P (-lap_D)^-1 P.
    """
    def project(x):
        return _flatten(_project(_unflatten(x, grid), refinements=1)[0])

    def apply_A(x):
        px = _unflatten(project(x), grid)
        return project(np.concatenate([-_laplacian_values(c, grid, DIRICHLET).ravel()
                                       for c in px.components]))

    def precond(r):
        pr = _unflatten(project(r), grid)
        return project(np.concatenate([spectral_shifted_solve(c, grid, DIRICHLET, 0.0, 1.0).ravel()
                                       for c in pr.components]))

    rng = np.random.default_rng(seed)
    x = project(rng.standard_normal(grid.ndim * grid.size))
    x /= np.linalg.norm(x)
    lam = float(np.vdot(x, apply_A(x)))
    for _ in range(maxiter):
        y, _, _ = conjugate_gradient(apply_A, x, tol=1e-12, maxiter=2000, precond=precond)
        y /= np.linalg.norm(y)
        lam_new = float(np.vdot(y, apply_A(y)))
        x = y
        if abs(lam_new - lam) <= tol * abs(lam_new):
            return lam_new
        lam = lam_new
    raise SolverError(f"Stokes eigenvalue iteration did not settle in {maxiter} steps")


def stokes_mode(grid: Grid, seed: int = 0, iterations: int = 60) -> VectorField:
    """Approximate slowest Stokes mode, unit L2 norm, by repeated viscous steps."""
    rng = np.random.default_rng(seed)
    v, _ = leray_project(VectorField(grid, tuple(rng.standard_normal(grid.dims) for _ in range(grid.ndim))))
    params = StokesParams()
    zero = ScalarField.constant(grid, 0.0)
    for _ in range(iterations):
        v, _ = stokes_step(v, zero, zero, 0.05, params)
        norm = math.sqrt(sum(float((c * c).sum()) for c in v.components) * grid.cell_volume)
        v = VectorField(grid, tuple(c / norm for c in v.components), DIRICHLET, True)
    return v
