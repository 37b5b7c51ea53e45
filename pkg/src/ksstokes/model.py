"""The coral-fertilisation chemotaxis system: state, parameters, explicit tendencies."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .domain import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField
from .exceptions import ContractViolation
from .fluid import StokesParams, buoyancy
from .operators import POSCLAMP_TOL, StencilSpec, advect, chemo_flux_div, divergence
from .sensitivity import SensitivityTensor, distance_to_boundary, eval_sensitivity  # noqa: F401


@dataclass
class ModelParams:
    sensitivity: SensitivityTensor = field(default_factory=SensitivityTensor)
    stokes: StokesParams = field(default_factory=StokesParams)
    advect_scheme: StencilSpec = StencilSpec.UPWIND1


@dataclass
class SimState:
    """Solution tuple (rho, m, c, u, P) at time ``t``.

    ``cum_reaction`` is the running sum of dt * int(rho m) and
    ``cum_dissipation_m`` the running sum of 2 dt ||grad m||^2, both
    accumulated by the stepper at every step.
    """

    rho: ScalarField
    m: ScalarField
    c: ScalarField
    u: VectorField
    p: ScalarField
    t: float = 0.0
    cum_reaction: float = 0.0
    cum_dissipation_m: float = 0.0
    steps: int = 0

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    @classmethod
    def from_arrays(cls, grid: Grid, rho, m, c, u=None, p=None, t: float = 0.0) -> "SimState":
        def scalar(x):
            return ScalarField(grid, np.broadcast_to(np.asarray(x, dtype=float), grid.dims).copy(), NEUMANN)

        if u is None:
            vel = VectorField.zeros(grid)
        elif isinstance(u, VectorField):
            vel = u
        else:
            vel = VectorField(grid, tuple(np.broadcast_to(np.asarray(x, float), grid.dims).copy() for x in u),
                              DIRICHLET, divergence_free=False)
        pressure = scalar(0.0 if p is None else p)
        return cls(scalar(rho), scalar(m), scalar(c), vel, pressure, float(t))

    @classmethod
    def rest(cls, grid: Grid) -> "SimState":
        return cls.from_arrays(grid, 0.0, 0.0, 0.0)

    def evolve(self, **changes) -> "SimState":
        return replace(self, **changes)

    def check(self, proj_tol: float = 1e-9) -> None:
        for name in ("rho", "m", "c"):
            f = getattr(self, name)
            if not f.is_finite():
                raise ContractViolation(f"{name} has non-finite values")
            if f.values.min() < -POSCLAMP_TOL:
                raise ContractViolation(f"{name} is negative (min {f.values.min():.3e})")
        if not self.u.is_finite():
            raise ContractViolation("u has non-finite values")
        if not self.u.divergence_free:
            raise ContractViolation("u is not flagged divergence-free")
        div = float(np.abs(divergence(self.u).values).max())
        if div > proj_tol:
            raise ContractViolation(f"u divergence {div:.3e} exceeds {proj_tol:.1e}")


def reaction_rates(rho: ScalarField, m: ScalarField):
    """Fertilisation sink -rho*m, shared by the rho and m equations."""
    r = -(rho.values * m.values)
    return rho.like(r), m.like(r.copy())


def cutoff_layer_mask(grid: Grid, S: SensitivityTensor) -> np.ndarray:
    """Cells whose every face lies where the boundary cutoff vanishes."""
    if S.cutoff_eta is None:
        return np.zeros(grid.dims, dtype=bool)
    width = S.cutoff_eta * min(grid.lengths)
    dist = distance_to_boundary(grid.cell_centers(), grid.lengths)
    return dist + 0.5 * max(grid.spacing) <= width


def assemble_rhs(state: SimState, params: ModelParams):
    """Explicit tendencies; every Laplacian and the -c damping are left to the implicit stage.

    Returns ``(rho_dot, m_dot, c_dot, u_dot)``.
    """
    rho, m, c, u = state.rho, state.m, state.c, state.u
    scheme = params.advect_scheme
    react_rho, react_m = reaction_rates(rho, m)
    rho_dot = -advect(rho, u, scheme).values - chemo_flux_div(rho, c, params.sensitivity, scheme).values
    rho_dot += react_rho.values
    m_dot = -advect(m, u, scheme).values + react_m.values
    c_dot = -advect(c, u, scheme).values + m.values
    if params.stokes.phi is not None:
        u_dot = buoyancy(rho, m, params.stokes.phi)
    else:
        u_dot = VectorField.zeros(state.grid, divergence_free=False)
    return rho.like(rho_dot), m.like(m_dot), c.like(c_dot), u_dot
