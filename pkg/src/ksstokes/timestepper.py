"""First-order IMEX stepping of the full system."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import ScalarField, integrate, vector_l2
from .exceptions import InvalidParameterError, StabilityError
from .fluid import stokes_step
from .model import ModelParams, SimState, assemble_rhs
from .operators import POSCLAMP_TOL, chemotactic_velocity, diffuse_implicit, dirichlet_energy, divergence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StepControl:
    dt: float = 0.01
    cfl_target: float = 0.4
    posclamp_tol: float = POSCLAMP_TOL
    clamp_budget: float = 1e-8

    def __post_init__(self):
        if not self.dt > 0:
            raise InvalidParameterError(f"dt must be > 0, got {self.dt}")
        if not 0 < self.cfl_target <= 1:
            raise InvalidParameterError(f"cfl_target must lie in (0, 1], got {self.cfl_target}")
        if not self.clamp_budget >= 0:
            raise InvalidParameterError("clamp_budget must be >= 0")


@dataclass
class StepReport:
    dt: float
    clamped_mass: float
    divergence: float
    # (||u_new||^2 - ||u||^2) / (dt (||rho||^2 + ||m||^2)); the measured constant K
    energy_ratio: float


def stable_dt(state: SimState, params: ModelParams, ctrl: StepControl) -> float:
    """min(ctrl.dt, CFL limit on transport + chemotactic drift, 0.5 / max(rho, m))."""
    grid = state.grid
    speed = sum(np.abs(c) for c in state.u.components)
    speed_max = float(np.max(speed))
    S = params.sensitivity
    if S.c_s > 0:
        drift = chemotactic_velocity(state.rho, state.c, S)
        speed_max += max(float(np.abs(d).max()) if d.size else 0.0 for d in drift)
    dt = ctrl.dt
    if speed_max > 0:
        dt = min(dt, ctrl.cfl_target * grid.h_min / speed_max)
    top = max(float(state.rho.values.max()), float(state.m.values.max()))
    if top > 0:
        dt = min(dt, 0.5 / top)
    return dt


def _clamp(f: ScalarField, tol: float):
    neg = f.values < 0
    if not neg.any():
        return f, 0.0
    if f.values.min() < -tol:
        logger.debug("clamping %d cells, min %.3e", int(neg.sum()), f.values.min())
    lost = float(-f.values[neg].sum() * f.grid.cell_volume)
    return f.like(np.where(neg, 0.0, f.values)), lost


def step_detailed(state: SimState, params: ModelParams, ctrl: StepControl,
                  dt: Optional[float] = None):
    """Advance one step; returns ``(new_state, StepReport)``.

    ``dt`` overrides the step size but is still capped by ``stable_dt``.
    """
    limit = stable_dt(state, params, ctrl)
    dt = limit if dt is None else min(dt, limit)
    if not dt > 0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")

    rho_dot, m_dot, c_dot, _ = assemble_rhs(state, params)
    reaction = float(np.sum(state.rho.values * state.m.values) * state.grid.cell_volume)

    rho = diffuse_implicit(state.rho.like(state.rho.values + dt * rho_dot.values), dt)
    m = diffuse_implicit(state.m.like(state.m.values + dt * m_dot.values), dt)
    c = diffuse_implicit(state.c.like(state.c.values + dt * c_dot.values), dt, damping=1.0)

    u, p = stokes_step(state.u, state.rho, state.m, dt, params.stokes)

    clamped = 0.0
    fields = []
    for f in (rho, m, c):
        f, lost = _clamp(f, ctrl.posclamp_tol)
        clamped += lost
        fields.append(f)
    rho, m, c = fields
    total = integrate(state.rho) + integrate(state.m) + integrate(state.c)
    if clamped > ctrl.clamp_budget * max(total, np.finfo(float).tiny):
        raise StabilityError(
            f"positivity clamp removed {clamped:.3e} mass (budget {ctrl.clamp_budget:.1e} relative); "
            "reduce dt"
        )

    div = float(np.abs(divergence(u).values).max())
    forcing = integrate(state.rho.like(state.rho.values**2)) + integrate(state.m.like(state.m.values**2))
    e_old, e_new = vector_l2(state.u) ** 2, vector_l2(u) ** 2
    ratio = (e_new - e_old) / (dt * forcing) if forcing > 0 else 0.0

    new = SimState(
        rho=rho, m=m, c=c, u=u, p=p,
        t=state.t + dt,
        cum_reaction=state.cum_reaction + dt * reaction,
        cum_dissipation_m=state.cum_dissipation_m + 2.0 * dt * dirichlet_energy(m),
        steps=state.steps + 1,
    )
    return new, StepReport(dt=dt, clamped_mass=clamped, divergence=div, energy_ratio=ratio)


def step(state: SimState, params: ModelParams, ctrl: StepControl, dt: Optional[float] = None) -> SimState:
    return step_detailed(state, params, ctrl, dt)[0]


def advance_to(state: SimState, params: ModelParams, ctrl: StepControl, t_target: float,
               reports: Optional[list] = None) -> SimState:
    """Step until ``t_target``; the final step lands on it exactly."""
    tol = 1e-12 * max(1.0, abs(t_target))
    while t_target - state.t > tol:
        state, rep = step_detailed(state, params, ctrl, dt=t_target - state.t)
        if t_target - state.t <= tol:
            state.t = t_target
        if reports is not None:
            reports.append(rep)
    return state
