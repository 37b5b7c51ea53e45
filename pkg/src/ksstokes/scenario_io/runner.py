"""Drive one scenario: step, sample, write CSV/snapshots, judge the run."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..diagnostics import (DiagnosticsRecord, GWeights, InvariantReport, RateFit, check_invariants,
                           equilibrium, expected_rate, fit_rate, record)
from ..exceptions import ConfigError, KSStokesError
from ..model import SimState
from ..operators import neumann_eigenvalue
from ..oracle import HomogeneousSolution, homogeneous_exact
from ..timestepper import advance_to
from .config import ScenarioConfig
from .csvio import CsvWriter, read_csv
from .snapshot import read_snapshot, write_snapshot

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_INVARIANT, EXIT_ERROR = 0, 1, 2
RATE_BAND = (0.5, 1.2)
ORACLE_TOL = 2e-3
NO_RATE = "no rate assertion"


@dataclass
class RateCheck:
    """Decay-rate assertion of the small-data regimes."""

    series: str
    target: float
    band: tuple[float, float]
    fit: Optional[RateFit]
    passed: bool
    note: str = ""

    def line(self) -> str:
        if self.fit is None:
            return f"FAIL rate {self.series}: {self.note}"
        lo, hi = self.band[0] * self.target, self.band[1] * self.target
        return (f"{'PASS' if self.passed else 'FAIL'} rate {self.series} = {self.fit.rate:.4f} "
                f"in [{lo:.4f}, {hi:.4f}] (target {self.target:.4f}, R^2 {self.fit.r_squared:.4f})")


@dataclass
class RunSummary:
    name: str
    history: list = field(default_factory=list)
    invariants: Optional[InvariantReport] = None
    rate: Optional[RateCheck] = None
    rate_note: str = ""
    oracle_error: Optional[float] = None
    max_divergence: float = 0.0
    max_energy_ratio: float = -math.inf
    steps: int = 0
    wall_time: float = 0.0
    error: Optional[str] = None
    exit_code: int = EXIT_PASS
    final_state: Optional[SimState] = None

    @property
    def passed(self) -> bool:
        return self.exit_code == EXIT_PASS

    def lines(self) -> list[str]:
        out = [f"scenario {self.name}: {len(self.history)} samples, {self.steps} steps, "
               f"{self.wall_time:.2f} s"]
        if self.error:
            out.append(f"ERROR {self.error}")
        if self.invariants is not None:
            out.extend(self.invariants.lines())
        if self.rate is not None:
            out.append(self.rate.line())
        elif self.rate_note:
            out.append(self.rate_note)
        if self.oracle_error is not None:
            verdict = "PASS" if self.oracle_error <= ORACLE_TOL else "FAIL"
            out.append(f"{verdict} oracle max error {self.oracle_error:.3e} (tol {ORACLE_TOL:.0e})")
        out.append(f"max divergence {self.max_divergence:.3e}")
        out.append(f"max energy ratio K {self.max_energy_ratio:.3e}")
        out.append(f"exit {self.exit_code}")
        return out


def _is_homogeneous(cfg: ScenarioConfig) -> bool:
    init = cfg.initial
    return (all(getattr(init, n).profile == "constant" for n in ("rho", "m", "c"))
            and (init.u.profile == "zero" or init.u.amplitude == 0))


def _oracle_error(cfg: ScenarioConfig, state: SimState) -> float:
    init = cfg.initial
    sol = HomogeneousSolution(init.rho.offset, init.m.offset, init.c.offset)
    exact = homogeneous_exact(sol, state.t)
    return max(float(np.abs(f.values - e).max()) for f, e in zip((state.rho, state.m, state.c), exact))


def _rate_check(cfg: ScenarioConfig, state0: SimState, history) -> tuple[Optional[RateCheck], str]:
    eq = equilibrium(state0.rho, state0.m)
    if eq.rho_inf == 0 and eq.m_inf == 0:
        return None, f"balanced masses: {NO_RATE}"
    if not cfg.rate_band:
        return None, ""
    # the surviving species settles; the other one is consumed at the bounded rate
    series = "linf_m" if eq.rho_inf > 0 else "linf_rho"
    target = expected_rate(neumann_eigenvalue(state0.grid), eq)
    window = tuple(cfg.rate_window) if cfg.rate_window else (0.5 * cfg.t_end, cfg.t_end)
    try:
        fit = fit_rate([(r.t, getattr(r, series)) for r in history], window)
    except KSStokesError as exc:
        return RateCheck(series, target, RATE_BAND, None, False, str(exc)), ""
    passed = RATE_BAND[0] * target <= fit.rate <= RATE_BAND[1] * target
    return RateCheck(series, target, RATE_BAND, fit, passed), ""


def run(cfg: ScenarioConfig, csv_path=None, checkpoint_path=None) -> RunSummary:
    """Run ``cfg`` to ``t_end``; paths default to ``cfg.output``.

    With ``cfg.restart_from`` set, stepping resumes from that snapshot and
    the CSV is appended to (its earlier rows are reloaded into the history).
    """
    started = time.perf_counter()
    summary = RunSummary(name=cfg.name)
    csv_path = csv_path if csv_path is not None else cfg.output.csv
    checkpoint_path = checkpoint_path if checkpoint_path is not None else cfg.output.checkpoint
    weights = GWeights(*cfg.g_weights)
    writer = None
    state = None
    try:
        grid = cfg.build_grid()
        params = cfg.build_params(grid)
        ctrl = cfg.build_control()
        state0 = cfg.initial_state(grid)
        history: list[DiagnosticsRecord] = []
        if cfg.restart_from:
            state = read_snapshot(cfg.restart_from)
            if state.grid != grid:
                raise ConfigError("restart snapshot grid differs from the configured grid")
            if csv_path is not None and Path(csv_path).exists():
                history = [r for r in read_csv(csv_path) if r.t <= state.t]
            writer = CsvWriter(csv_path, append=True) if csv_path is not None else None
            k0 = round(state.t / cfg.sample_interval)
            if not history:
                rec = record(state, eps_Y=cfg.eps_Y, weights=weights)
                history.append(rec)
                if writer:
                    writer.write(rec)
        else:
            state = state0
            writer = CsvWriter(csv_path) if csv_path is not None else None
            rec = record(state, eps_Y=cfg.eps_Y, weights=weights)
            history.append(rec)
            if writer:
                writer.write(rec)
            k0 = 0

        n_samples = math.floor(cfg.t_end / cfg.sample_interval + 1e-9)
        pending_snaps = sorted(t for t in cfg.output.snapshot_times if t > state.t)
        homogeneous = _is_homogeneous(cfg)
        oracle_err = 0.0 if homogeneous else None
        reports: list = []
        for k in range(k0 + 1, n_samples + 1):
            state = advance_to(state, params, ctrl, k * cfg.sample_interval, reports)
            for rep in reports:
                summary.max_divergence = max(summary.max_divergence, rep.divergence)
                summary.max_energy_ratio = max(summary.max_energy_ratio, rep.energy_ratio)
            reports.clear()
            rec = record(state, history[-1], eps_Y=cfg.eps_Y, weights=weights)
            history.append(rec)
            if writer:
                writer.write(rec)
            if homogeneous:
                oracle_err = max(oracle_err, _oracle_error(cfg, state))
            while pending_snaps and pending_snaps[0] <= state.t + 1e-12:
                snap_t = pending_snaps.pop(0)
                if cfg.output.snapshot_dir:
                    write_snapshot(state, Path(cfg.output.snapshot_dir) / f"snapshot_t{snap_t:.6g}.bin")
            logger.debug("t=%.4f mass_diff=%.15e", rec.t, rec.mass_diff)

        summary.history = history
        summary.steps = state.steps
        summary.final_state = state
        summary.oracle_error = oracle_err
        if checkpoint_path:
            write_snapshot(state, checkpoint_path)
        summary.invariants = check_invariants(history) if len(history) >= 2 else InvariantReport()
        summary.rate, summary.rate_note = _rate_check(cfg, state0, history)
        failed = (not summary.invariants.passed
                  or (summary.rate is not None and not summary.rate.passed)
                  or (oracle_err is not None and oracle_err > ORACLE_TOL)
                  or summary.max_divergence > cfg.model.proj_tol)
        summary.exit_code = EXIT_INVARIANT if failed else EXIT_PASS
    except (KSStokesError, ValueError, OSError) as exc:
        logger.error("run aborted: %s", exc)
        summary.error = f"{type(exc).__name__}: {exc}"
        summary.exit_code = EXIT_ERROR
        summary.final_state = state
        if checkpoint_path and state is not None:
            write_snapshot(state, checkpoint_path)
    finally:
        if writer is not None:
            writer.close()
        summary.wall_time = time.perf_counter() - started
    return summary
