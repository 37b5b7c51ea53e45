"""Finite-difference operators on the cell-centred box grid.

Ghost cells implement the boundary conditions: even reflection for
``NEUMANN`` and odd reflection (antireflection) for ``DIRICHLET``. The
centred ``gradient`` and ``divergence`` are exact adjoints,
``<grad f, v> = -<f, div v>`` for no-slip ``v``, which is what makes the
discrete Leray projection an orthogonal projector.

Implicit solves use conjugate gradients. The box operators are
diagonalised by DCT-II (Neumann) and DST-II (Dirichlet) bases, which we use
as an exact preconditioner; with ``precondition=False`` CG runs bare.
"""

from __future__ import annotations

import enum
import math
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.fft as sfft

from .domain import DIRICHLET, NEUMANN, BoundaryCondition, Grid, ScalarField, VectorField, inner
from .exceptions import ContractViolation, InvalidParameterError, SolverError
from .sensitivity import SensitivityTensor

POSCLAMP_TOL = 1e-12
CG_TOL = 1e-10


class StencilSpec(enum.Enum):
    UPWIND1 = "upwind1"
    CENTRAL2 = "central2"


def _pad(values: np.ndarray, axis: int, bc: BoundaryCondition) -> np.ndarray:
    lo = np.take(values, [0], axis=axis)
    hi = np.take(values, [-1], axis=axis)
    if bc is DIRICHLET:
        lo, hi = -lo, -hi
    return np.concatenate([lo, values, hi], axis=axis)


def _shift(a: np.ndarray, axis: int, start: int, stop: Optional[int]) -> np.ndarray:
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(start, stop)
    return a[tuple(idx)]


def _laplacian_values(values: np.ndarray, grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    out = np.zeros_like(values)
    for a, h in enumerate(grid.spacing):
        p = _pad(values, a, bc)
        out += (_shift(p, a, 2, None) - 2.0 * values + _shift(p, a, 0, -2)) / (h * h)
    return out


def laplacian(f: ScalarField) -> ScalarField:
    """Second-order compact Laplacian honouring ``f.bc``."""
    return f.like(_laplacian_values(f.values, f.grid, f.bc))


def _centered_diff(values: np.ndarray, axis: int, h: float, bc: BoundaryCondition) -> np.ndarray:
    p = _pad(values, axis, bc)
    return (_shift(p, axis, 2, None) - _shift(p, axis, 0, -2)) / (2.0 * h)


def gradient(f: ScalarField) -> VectorField:
    comps = tuple(_centered_diff(f.values, a, h, f.bc) for a, h in enumerate(f.grid.spacing))
    # Normal component of the gradient of a Neumann field is odd across walls.
    return VectorField(f.grid, comps, DIRICHLET, divergence_free=False)


def divergence(v: VectorField) -> ScalarField:
    out = np.zeros(v.grid.dims)
    for a, h in enumerate(v.grid.spacing):
        out += _centered_diff(v.components[a], a, h, v.bc)
    return ScalarField(v.grid, out, NEUMANN)


def dirichlet_energy(f: ScalarField) -> float:
    """-<f, lap f>, the squared L2 norm of the face-difference gradient."""
    return -inner(f, laplacian(f))


def face_velocity(u: VectorField, axis: int) -> np.ndarray:
    """Normal velocity on all ``dims[axis] + 1`` faces; zero on the walls."""
    c = u.components[axis]
    inner_faces = 0.5 * (_shift(c, axis, 1, None) + _shift(c, axis, 0, -1))
    shape = list(c.shape)
    shape[axis] = 1
    wall = np.zeros(shape)
    return np.concatenate([wall, inner_faces, wall], axis=axis)


def _face_flux_divergence(flux_inner: np.ndarray, axis: int, h: float) -> np.ndarray:
    shape = list(flux_inner.shape)
    shape[axis] = 1
    wall = np.zeros(shape)
    flux = np.concatenate([wall, flux_inner, wall], axis=axis)
    return (_shift(flux, axis, 1, None) - _shift(flux, axis, 0, -1)) / h


def _face_value(values: np.ndarray, axis: int, speed: np.ndarray, scheme: StencilSpec) -> np.ndarray:
    left = _shift(values, axis, 0, -1)
    right = _shift(values, axis, 1, None)
    if scheme is StencilSpec.UPWIND1:
        return np.where(speed > 0, left, right)
    return 0.5 * (left + right)


def advect(f: ScalarField, u: VectorField, scheme: StencilSpec = StencilSpec.UPWIND1) -> ScalarField:
    """Conservative transport term div(u f) with zero flux through the walls."""
    if not u.divergence_free:
        raise ContractViolation("advect requires a divergence-free velocity (project it first)")
    out = np.zeros(f.grid.dims)
    for a, h in enumerate(f.grid.spacing):
        U = _shift(face_velocity(u, a), a, 1, -1)
        out += _face_flux_divergence(U * _face_value(f.values, a, U, scheme), a, h)
    return f.like(out)


def chemotactic_velocity(rho: ScalarField, c: ScalarField, S: SensitivityTensor) -> list[np.ndarray]:
    """Drift (S grad c) normal to each family of interior faces."""
    grid = rho.grid
    R = S.rotation(grid.ndim)
    cell_grad = [_centered_diff(c.values, b, h, c.bc) for b, h in enumerate(grid.spacing)]
    drifts = []
    for a, h in enumerate(grid.spacing):
        grad_face = []
        for b in range(grid.ndim):
            if b == a:
                grad_face.append((_shift(c.values, a, 1, None) - _shift(c.values, a, 0, -1)) / h)
            else:
                g = cell_grad[b]
                grad_face.append(0.5 * (_shift(g, a, 1, None) + _shift(g, a, 0, -1)))
        rho_avg = 0.5 * (_shift(rho.values, a, 1, None) + _shift(rho.values, a, 0, -1))
        coords = tuple(_shift(x, a, 1, -1) for x in grid.face_centers(a))
        scale = S.magnitude(coords, grid.lengths, rho_avg)
        drifts.append(scale * sum(R[a, b] * grad_face[b] for b in range(grid.ndim)))
    return drifts


def chemo_flux_div(rho: ScalarField, c: ScalarField, S: SensitivityTensor,
                   scheme: StencilSpec = StencilSpec.UPWIND1) -> ScalarField:
    """div(rho S grad c) from face fluxes, zero normal flux on the walls."""
    if rho.values.min() < -POSCLAMP_TOL:
        raise ContractViolation(f"rho has negative values (min {rho.values.min():.3e})")
    out = np.zeros(rho.grid.dims)
    if S.c_s == 0:
        return rho.like(out)
    for a, (h, v) in enumerate(zip(rho.grid.spacing, chemotactic_velocity(rho, c, S))):
        out += _face_flux_divergence(_face_value(rho.values, a, v, scheme) * v, a, h)
    return rho.like(out)


# --------------------------------------------------------------------------
# linear solves

def conjugate_gradient(apply_A: Callable[[np.ndarray], np.ndarray], b: np.ndarray,
                       x0: Optional[np.ndarray] = None, tol: float = CG_TOL,
                       maxiter: Optional[int] = None,
                       precond: Optional[Callable[[np.ndarray], np.ndarray]] = None):
    """Preconditioned CG for a symmetric positive (semi)definite operator.

    Returns ``(x, iterations, relative_residual)``; raises ``SolverError`` if
    ``||b - A x|| <= tol * ||b||`` is not met within ``maxiter`` iterations.
    """
    if maxiter is None:
        maxiter = max(10 * int(math.ceil(math.sqrt(b.size))), 20)
    x = np.zeros_like(b) if x0 is None else x0.copy()
    bnorm = math.sqrt(float(np.vdot(b, b)))
    if bnorm == 0.0:
        return np.zeros_like(b), 0, 0.0
    r = b - apply_A(x)
    rnorm = math.sqrt(float(np.vdot(r, r)))
    if rnorm <= tol * bnorm:
        return x, 0, rnorm / bnorm
    z = precond(r) if precond else r
    p = z.copy()
    rz = float(np.vdot(r, z))
    for it in range(1, maxiter + 1):
        Ap = apply_A(p)
        pAp = float(np.vdot(p, Ap))
        if pAp <= 0:
            raise SolverError("CG breakdown: operator not positive on search direction",
                              residual=rnorm / bnorm, iterations=it)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rnorm = math.sqrt(float(np.vdot(r, r)))
        if rnorm <= tol * bnorm:
            return x, it, rnorm / bnorm
        z = precond(r) if precond else r
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise SolverError(
        f"CG did not converge in {maxiter} iterations (relative residual {rnorm / bnorm:.3e})",
        residual=rnorm / bnorm, iterations=maxiter,
    )


def _eig_1d(n: int, h: float, kind: str) -> np.ndarray:
    k = np.arange(n)
    if kind == "neumann":
        return -4.0 / h**2 * np.sin(np.pi * k / (2 * n)) ** 2
    if kind == "dirichlet":
        return -4.0 / h**2 * np.sin(np.pi * (k + 1) / (2 * n)) ** 2
    if kind == "wide":
        return -np.sin(np.pi * k / n) ** 2 / h**2
    raise ValueError(kind)


@lru_cache(maxsize=64)
def laplacian_symbol(grid: Grid, kind: str) -> np.ndarray:
    """Eigenvalues of a box Laplacian in its transform basis.

    ``neumann``/``dirichlet``: compact stencil; ``wide``: ``div(grad .)``.
    """
    total = np.zeros(grid.dims)
    for a, (n, h) in enumerate(zip(grid.dims, grid.spacing)):
        shape = [1] * grid.ndim
        shape[a] = n
        total = total + _eig_1d(n, h, kind).reshape(shape)
    total.setflags(write=False)
    return total


def forward_transform(values: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    if bc is NEUMANN:
        return sfft.dctn(values, type=2, norm="ortho")
    return sfft.dstn(values, type=2, norm="ortho")


def inverse_transform(coeffs: np.ndarray, bc: BoundaryCondition) -> np.ndarray:
    if bc is NEUMANN:
        return sfft.idctn(coeffs, type=2, norm="ortho")
    return sfft.idstn(coeffs, type=2, norm="ortho")


def spectral_shifted_solve(rhs: np.ndarray, grid: Grid, bc: BoundaryCondition,
                           shift: float, coeff: float) -> np.ndarray:
    """Direct solve of ``(shift I - coeff lap) g = rhs`` in the transform basis."""
    kind = "neumann" if bc is NEUMANN else "dirichlet"
    denom = shift - coeff * laplacian_symbol(grid, kind)
    return inverse_transform(forward_transform(rhs, bc) / denom, bc)


def diffuse_implicit(f: ScalarField, dt: float, kappa: float = 1.0, damping: float = 0.0,
                     precondition: bool = True, tol: float = CG_TOL,
                     maxiter: Optional[int] = None) -> ScalarField:
    """Backward-Euler step of ``g_t = kappa lap g - damping g`` from ``f``."""
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    if not kappa > 0:
        raise InvalidParameterError(f"kappa must be > 0, got {kappa}")
    if not damping >= 0:
        raise InvalidParameterError(f"damping must be >= 0, got {damping}")
    grid, bc = f.grid, f.bc
    shift, coeff = 1.0 + dt * damping, dt * kappa

    def apply_A(x):
        return shift * x - coeff * _laplacian_values(x, grid, bc)

    precond = None
    if precondition:
        def precond(r):
            return spectral_shifted_solve(r, grid, bc, shift, coeff)

    # Starting from f keeps every CG increment mean-free under Neumann data.
    g, _, _ = conjugate_gradient(apply_A, f.values, x0=f.values, tol=tol,
                                 maxiter=maxiter, precond=precond)
    return f.like(g)


def neumann_eigenvalue(grid: Grid) -> float:
    """Smallest nonzero eigenvalue of the discrete Neumann -Laplacian."""
    return float(min(-_eig_1d(n, h, "neumann")[1] for n, h in zip(grid.dims, grid.spacing)))
