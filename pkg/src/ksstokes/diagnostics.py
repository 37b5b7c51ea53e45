"""Per-sample diagnostics, equilibria, decay-rate fits and invariant checks."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .domain import DIRICHLET, ScalarField, integrate, lp_norm, mean, vector_l2, vector_linf
from .exceptions import InvalidWindowError
from .model import SimState
from .operators import gradient

MIN_FIT_SAMPLES = 10


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass_rho: float
    mass_m: float
    mass_diff: float
    linf_rho: float
    linf_m: float
    linf_c: float
    linf_u: float
    l2_rho_dev: float
    l2_m_dev: float
    l2_c_dev: float
    l2_u: float
    l2_grad_c: float
    l2_grad_u: float
    cum_reaction: float
    Y: float
    G: float
    # not part of the required schema; they make the L2 dissipation check replayable
    cum_dissipation_m: Optional[float] = None
    l2_m: Optional[float] = None

    @property
    def masses(self):
        return self.mass_rho, self.mass_m, self.mass_diff

    @property
    def linf(self):
        return self.linf_rho, self.linf_m, self.linf_c, self.linf_u

    @property
    def l2(self):
        return (self.l2_rho_dev, self.l2_m_dev, self.l2_c_dev, self.l2_u,
                self.l2_grad_c, self.l2_grad_u)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass(frozen=True)
class GWeights:
    """Weights of the m-deviation, c-deviation and int(rho m) terms of G."""

    m: float = 1.0
    c: float = 1.0
    reaction: float = 1.0


def _deviation_norm(f: ScalarField) -> float:
    return lp_norm(f.like(f.values - mean(f)), 2)


def _grad_norm(f: ScalarField) -> float:
    return vector_l2(gradient(f))


def record(state: SimState, prev: Optional[DiagnosticsRecord] = None, eps_Y: float = 1.0,
           weights: GWeights = GWeights()) -> DiagnosticsRecord:
    """Diagnostics of one state.

    ``cum_reaction`` comes from the stepper's per-step sum. ``prev`` is only
    consulted for states that carry no step history (``steps == 0`` and
    ``t > 0``); there the integral is extended by the trapezoidal rule.
    """
    rho, m, c, u = state.rho, state.m, state.c, state.u
    mass_rho, mass_m = integrate(rho), integrate(m)
    reaction = integrate(rho.like(rho.values * m.values))
    cum = state.cum_reaction
    if state.steps == 0 and prev is not None and state.t > prev.t:
        # previous reaction rate is not stored, so reuse the current one
        cum = prev.cum_reaction + (state.t - prev.t) * reaction
    l2_u = vector_l2(u)
    grad_u = math.sqrt(sum(_grad_norm(ScalarField(u.grid, comp, DIRICHLET)) ** 2 for comp in u.components))
    grad_c = _grad_norm(c)
    dev_rho, dev_m, dev_c = _deviation_norm(rho), _deviation_norm(m), _deviation_norm(c)
    Y = lp_norm(rho, 2) ** 2 + l2_u**2 + grad_u**2 + grad_c**2 / eps_Y
    G = dev_rho**2 + weights.m * dev_m**2 + weights.c * dev_c**2 + weights.reaction * reaction
    return DiagnosticsRecord(
        t=state.t,
        mass_rho=mass_rho, mass_m=mass_m, mass_diff=mass_rho - mass_m,
        linf_rho=lp_norm(rho, math.inf), linf_m=lp_norm(m, math.inf),
        linf_c=lp_norm(c, math.inf), linf_u=vector_linf(u),
        l2_rho_dev=dev_rho, l2_m_dev=dev_m, l2_c_dev=dev_c, l2_u=l2_u,
        l2_grad_c=grad_c, l2_grad_u=grad_u,
        cum_reaction=cum, Y=Y, G=G,
        cum_dissipation_m=state.cum_dissipation_m, l2_m=lp_norm(m, 2),
    )


@dataclass(frozen=True)
class EquilibriumSpec:
    rho_inf: float
    m_inf: float


def equilibrium(rho0: ScalarField, m0: ScalarField, rel_tol: float = 1e-12) -> EquilibriumSpec:
    """Plus-part limits of the means; differences below ``rel_tol`` count as balanced."""
    if rho0.values.min() < 0 or m0.values.min() < 0:
        raise ValueError("initial data must be nonnegative")
    a, b = mean(rho0), mean(m0)
    d = a - b
    if abs(d) <= rel_tol * (abs(a) + abs(b)):
        d = 0.0
    return EquilibriumSpec(rho_inf=max(d, 0.0), m_inf=max(-d, 0.0))


@dataclass(frozen=True)
class RateFit:
    rate: float
    r_squared: float
    window: tuple[float, float]
    n_samples: int
    amplitude: float


def _loglinear(t: np.ndarray, v: np.ndarray):
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    resid = logv - (slope * t + intercept)
    ss_tot = float(((logv - logv.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid**2).sum()) / ss_tot
    return float(slope), float(intercept), r2


def fit_rate(series: Iterable[tuple[float, float]], window: tuple[float, float]) -> RateFit:
    """Least-squares exponential decay rate of ``value(t)`` over ``window``."""
    t0, t1 = window
    if not t1 > t0:
        raise InvalidWindowError(f"empty window {window}")
    arr = np.asarray([(t, v) for t, v in series if t0 <= t <= t1], dtype=float)
    if len(arr) < MIN_FIT_SAMPLES:
        raise InvalidWindowError(f"window {window} holds {len(arr)} samples, need {MIN_FIT_SAMPLES}")
    t, v = arr[:, 0], arr[:, 1]
    if not (v > 0).all():
        raise InvalidWindowError(f"nonpositive values in window {window}; shrink it")
    slope, intercept, r2 = _loglinear(t, v)
    return RateFit(rate=-slope, r_squared=r2, window=(float(t0), float(t1)),
                   n_samples=len(t), amplitude=math.exp(intercept))


def monotone_after(series: Sequence[tuple[float, float]], t0: float, slack: float = 0.0) -> bool:
    """True when values never grow by more than ``slack`` (relative) per sample after ``t0``."""
    if not len(series):
        raise ValueError("series is empty")
    tail = [v for t, v in series if t >= t0]
    return all(b <= a + slack * abs(a) for a, b in zip(tail, tail[1:]))


# --------------------------------------------------------------------------
# invariant suite

@dataclass(frozen=True)
class InvariantBudget:
    mass_diff_rel: float = 1e-8
    mass_monotone_rel: float = 1e-12
    max_principle_abs: float = 1e-10
    cum_reaction_rel: float = 1e-8
    l2_dissipation_rel: float = 1e-6


@dataclass(frozen=True)
class InvariantResult:
    name: str
    passed: bool
    worst_margin: float
    index: Optional[int]
    note: str = ""


@dataclass
class InvariantReport:
    results: list[InvariantResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> InvariantResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def failures(self) -> list[InvariantResult]:
        return [r for r in self.results if not r.passed]

    def lines(self) -> list[str]:
        return [f"{'PASS' if r.passed else 'FAIL'} {r.name} margin={r.worst_margin:.3e}"
                + (f" index={r.index}" if r.index is not None else "")
                + (f" ({r.note})" if r.note else "")
                for r in self.results]


def _judge(name: str, excess: np.ndarray, offset: int = 0, note: str = "") -> InvariantResult:
    """``excess`` > 0 marks a violation; margin is -max(excess)."""
    if excess.size == 0:
        return InvariantResult(name, True, math.inf, None, note or "no samples")
    bad = np.flatnonzero(excess > 0)
    if bad.size:
        return InvariantResult(name, False, float(-excess.max()), int(bad[0]) + offset, note)
    worst = int(np.argmax(excess))
    return InvariantResult(name, True, float(-excess[worst]), worst + offset, note)


def check_invariants(history: Sequence[DiagnosticsRecord],
                     budget: InvariantBudget = InvariantBudget()) -> InvariantReport:
    """Evaluate the L1, reaction, L2 and maximum-principle bounds over a run."""
    if len(history) < 2:
        raise ValueError("need at least two records")
    col = {name: np.array([getattr(r, name) if getattr(r, name) is not None else np.nan
                           for r in history], dtype=float)
           for name in DiagnosticsRecord.field_names()}
    first = history[0]
    report = InvariantReport()
    numeric = np.column_stack([col[n] for n in DiagnosticsRecord.field_names()[:17]])
    finite = np.isfinite(numeric).all(axis=1)
    report.results.append(_judge("finite", (~finite).astype(float)))

    scale = first.mass_rho + first.mass_m
    report.results.append(_judge(
        "mass_difference_conserved",
        np.abs(col["mass_diff"] - first.mass_diff) - budget.mass_diff_rel * scale))
    for name in ("mass_rho", "mass_m"):
        report.results.append(_judge(
            f"{name}_nonincreasing",
            np.diff(col[name]) - budget.mass_monotone_rel * max(getattr(first, name), 1e-300), offset=1))
    report.results.append(_judge(
        "linf_m_nonincreasing", np.diff(col["linf_m"]) - budget.max_principle_abs, offset=1))
    c_cap = max(first.linf_m, first.linf_c)
    report.results.append(_judge(
        "linf_c_bounded", col["linf_c"] - c_cap - budget.max_principle_abs))
    cap = min(first.mass_rho, first.mass_m) * (1.0 + budget.cum_reaction_rel)
    report.results.append(_judge("cum_reaction_bounded", col["cum_reaction"] - cap))
    report.results.append(_judge(
        "cum_reaction_nondecreasing", -np.diff(col["cum_reaction"]), offset=1))
    if np.isnan(col["l2_m"]).any() or np.isnan(col["cum_dissipation_m"]).any():
        report.results.append(InvariantResult("l2_dissipation_m", True, math.inf, None,
                                              "skipped: history lacks l2_m/cum_dissipation_m"))
    else:
        energy = col["l2_m"] ** 2 + col["cum_dissipation_m"]
        report.results.append(_judge(
            "l2_dissipation_m", energy - first.l2_m**2 * (1.0 + budget.l2_dissipation_rel)))
    return report


def expected_rate(lambda1: float, eq: EquilibriumSpec) -> float:
    """Upper end of the admissible exponential rates, min(lambda_1, rho_inf + m_inf)."""
    return min(lambda1, eq.rho_inf + eq.m_inf)
