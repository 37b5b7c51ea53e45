"""Scenario configuration: YAML documents, presets, validation, initial data."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, fields, is_dataclass
from typing import Any, Optional

import numpy as np
import yaml

from ..domain import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField
from ..exceptions import ConfigError, KSStokesError
from ..fluid import StokesParams, leray_project
from ..model import ModelParams, SimState
from ..operators import StencilSpec
from ..sensitivity import SensitivityTensor
from ..timestepper import StepControl

PRESET_NAMES = ("bounded_regime", "smalldata_rho", "smalldata_m", "balanced", "homogeneous_oracle")


@dataclass
class GridSpec:
    dims: list = field(default_factory=lambda: [32, 32])
    lengths: Optional[list] = None


@dataclass
class ModelSpec:
    c_s: float = 1.0
    alpha: float = 0.0
    rotation_angle: float = 0.0
    cutoff_eta: Optional[float] = None
    advect_scheme: str = "upwind1"
    proj_tol: float = 1e-9


@dataclass
class PhiSpec:
    """``linear``: strength * x_axis; ``quadratic_well``: strength * |x - centre|^2 / 2."""

    profile: str = "linear"
    strength: float = 1.0
    axis: int = 0


@dataclass
class FieldSpec:
    profile: str = "constant"  # constant | cosine | noise | gaussian
    offset: float = 0.0
    amplitude: float = 0.0
    modes: Optional[list] = None
    center: Optional[list] = None
    width: float = 0.1
    max_mode: int = 3


@dataclass
class VelocitySpec:
    profile: str = "zero"  # zero | noise
    amplitude: float = 0.0
    max_mode: int = 3


@dataclass
class InitialSpec:
    rho: FieldSpec = field(default_factory=FieldSpec)
    m: FieldSpec = field(default_factory=FieldSpec)
    c: FieldSpec = field(default_factory=FieldSpec)
    u: VelocitySpec = field(default_factory=VelocitySpec)


@dataclass
class ControlSpec:
    dt: float = 0.01
    cfl_target: float = 0.4
    clamp_budget: float = 1e-8


@dataclass
class OutputSpec:
    csv: Optional[str] = None
    snapshot_dir: Optional[str] = None
    snapshot_times: list = field(default_factory=list)
    checkpoint: Optional[str] = None


@dataclass
class ScenarioConfig:
    name: str = "custom"
    preset: Optional[str] = None
    seed: int = 0
    t_end: float = 1.0
    sample_interval: float = 0.1
    eps_Y: float = 1.0
    g_weights: list = field(default_factory=lambda: [1.0, 1.0, 1.0])
    rate_band: bool = False
    rate_window: Optional[list] = None
    restart_from: Optional[str] = None
    grid: GridSpec = field(default_factory=GridSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    phi: PhiSpec = field(default_factory=PhiSpec)
    initial: InitialSpec = field(default_factory=InitialSpec)
    control: ControlSpec = field(default_factory=ControlSpec)
    output: OutputSpec = field(default_factory=OutputSpec)

    # -- derived objects -------------------------------------------------
    def build_grid(self) -> Grid:
        return Grid(self.grid.dims, self.grid.lengths)

    def build_phi(self, grid: Grid) -> Optional[ScalarField]:
        p = self.phi
        if p.profile == "none":
            return None
        coords = grid.cell_centers()
        if p.profile == "linear":
            values = p.strength * coords[p.axis]
        else:
            values = 0.5 * p.strength * sum((x - 0.5 * L) ** 2 for x, L in zip(coords, grid.lengths))
        return ScalarField(grid, values, NEUMANN)

    def build_params(self, grid: Optional[Grid] = None) -> ModelParams:
        grid = grid or self.build_grid()
        md = self.model
        return ModelParams(
            sensitivity=SensitivityTensor(md.c_s, md.alpha, md.rotation_angle, md.cutoff_eta),
            stokes=StokesParams(phi=self.build_phi(grid), proj_tol=md.proj_tol),
            advect_scheme=StencilSpec(md.advect_scheme),
        )

    def build_control(self) -> StepControl:
        c = self.control
        return StepControl(dt=c.dt, cfl_target=c.cfl_target, clamp_budget=c.clamp_budget)

    def initial_state(self, grid: Optional[Grid] = None) -> SimState:
        grid = grid or self.build_grid()
        arrays = {}
        for i, name in enumerate(("rho", "m", "c")):
            spec = getattr(self.initial, name)
            arrays[name] = _scalar_profile(grid, spec, np.random.default_rng([self.seed, i]))
            _check_initial(name, arrays[name])
        u = _velocity_profile(grid, self.initial.u, np.random.default_rng([self.seed, 3]),
                              self.model.proj_tol)
        return SimState.from_arrays(grid, arrays["rho"], arrays["m"], arrays["c"], u=u)


def _check_initial(name: str, values: np.ndarray) -> None:
    if not np.isfinite(values).all():
        raise ConfigError(f"initial {name} is not finite")
    if values.min() < 0:
        raise ConfigError(f"initial {name} must be nonnegative (min {values.min():.3e})")
    if not (values > 0).any():
        raise ConfigError(f"initial {name} must not vanish identically")


def _cosine_mix(grid: Grid, rng: np.random.Generator, max_mode: int) -> np.ndarray:
    """Random zero-mean combination of low Neumann cosine modes, scaled to max |.| = 1."""
    coords = grid.cell_centers()
    out = np.zeros(grid.dims)
    for ks in np.ndindex(*([max_mode + 1] * grid.ndim)):
        if not any(ks):
            continue
        mode = np.ones(grid.dims)
        for x, k, L in zip(coords, ks, grid.lengths):
            mode = mode * np.cos(k * math.pi * x / L)
        out += rng.uniform(-1.0, 1.0) / (1.0 + sum(ks)) * mode
    peak = np.abs(out).max()
    return out / peak if peak > 0 else out


def _scalar_profile(grid: Grid, spec: FieldSpec, rng: np.random.Generator) -> np.ndarray:
    coords = grid.cell_centers()
    base = np.full(grid.dims, float(spec.offset))
    if spec.profile == "constant":
        return base
    if spec.profile == "cosine":
        modes = spec.modes or [1] + [0] * (grid.ndim - 1)
        shape = np.ones(grid.dims)
        for x, k, L in zip(coords, modes, grid.lengths):
            shape = shape * np.cos(k * math.pi * x / L)
        return base + spec.amplitude * shape
    if spec.profile == "noise":
        return base + spec.amplitude * _cosine_mix(grid, rng, spec.max_mode)
    if spec.profile == "gaussian":
        center = spec.center or [0.5 * L for L in grid.lengths]
        r2 = sum((x - c0) ** 2 for x, c0 in zip(coords, center))
        return base + spec.amplitude * np.exp(-r2 / (2.0 * spec.width**2))
    raise ConfigError(f"unknown field profile {spec.profile!r}")


def _velocity_profile(grid: Grid, spec: VelocitySpec, rng: np.random.Generator,
                      proj_tol: float) -> VectorField:
    if spec.profile == "zero" or spec.amplitude == 0:
        return VectorField.zeros(grid)
    if spec.profile != "noise":
        raise ConfigError(f"unknown velocity profile {spec.profile!r}")
    raw = VectorField(grid, tuple(_cosine_mix(grid, rng, spec.max_mode) for _ in range(grid.ndim)), DIRICHLET)
    w, _ = leray_project(raw, proj_tol)
    peak = float(w.magnitude().max())
    scale = spec.amplitude / peak if peak > 0 else 0.0
    return VectorField(grid, tuple(scale * c for c in w.components), DIRICHLET, True)


# --------------------------------------------------------------------------
# presets

_ROT_QUARTER = math.pi / 4

PRESETS: dict[str, dict] = {
    "homogeneous_oracle": {
        "name": "homogeneous_oracle",
        "t_end": 1.0, "sample_interval": 0.05,
        "grid": {"dims": [16, 16, 16]},
        "model": {"c_s": 0.0, "alpha": 0.0},
        "phi": {"profile": "linear", "strength": 1.0},
        "initial": {
            "rho": {"profile": "constant", "offset": 2.0},
            "m": {"profile": "constant", "offset": 1.0},
            "c": {"profile": "constant", "offset": 1.0},
            "u": {"profile": "zero"},
        },
        "control": {"dt": 1e-3},
    },
    "smalldata_rho": {
        "name": "smalldata_rho",
        "t_end": 20.0, "sample_interval": 0.1, "rate_band": True,
        "grid": {"dims": [64, 64]},
        "model": {"c_s": 1.0, "alpha": 0.0, "rotation_angle": _ROT_QUARTER},
        "phi": {"profile": "linear", "strength": 1.0},
        "initial": {
            "rho": {"profile": "noise", "offset": 1.0, "amplitude": 0.05},
            "m": {"profile": "noise", "offset": 0.1, "amplitude": 0.05},
            "c": {"profile": "noise", "offset": 0.02, "amplitude": 0.01},
            "u": {"profile": "noise", "amplitude": 0.01},
        },
        "control": {"dt": 0.01},
    },
    "smalldata_m": {
        "name": "smalldata_m",
        "t_end": 20.0, "sample_interval": 0.1, "rate_band": True,
        "grid": {"dims": [64, 64]},
        "model": {"c_s": 1.0, "alpha": 0.0, "rotation_angle": _ROT_QUARTER},
        "phi": {"profile": "linear", "strength": 1.0},
        "initial": {
            "rho": {"profile": "noise", "offset": 0.1, "amplitude": 0.05},
            "m": {"profile": "noise", "offset": 1.0, "amplitude": 0.05},
            "c": {"profile": "noise", "offset": 0.9, "amplitude": 0.01},
            "u": {"profile": "noise", "amplitude": 0.01},
        },
        "control": {"dt": 0.01},
    },
    "balanced": {
        "name": "balanced",
        "t_end": 20.0, "sample_interval": 0.1,
        "grid": {"dims": [32, 32]},
        "model": {"c_s": 1.0, "alpha": 0.5, "rotation_angle": 0.5},
        "phi": {"profile": "linear", "strength": 1.0},
        "initial": {
            "rho": {"profile": "cosine", "offset": 0.5, "amplitude": 0.2, "modes": [1, 0]},
            "m": {"profile": "cosine", "offset": 0.5, "amplitude": 0.2, "modes": [0, 1]},
            "c": {"profile": "noise", "offset": 0.3, "amplitude": 0.1},
            "u": {"profile": "noise", "amplitude": 0.01},
        },
        "control": {"dt": 0.01},
    },
    "bounded_regime": {
        "name": "bounded_regime",
        "t_end": 20.0, "sample_interval": 0.1,
        "grid": {"dims": [32, 32]},
        "model": {"c_s": 2.0, "alpha": 0.5, "rotation_angle": math.pi / 3, "cutoff_eta": 0.1},
        "phi": {"profile": "quadratic_well", "strength": 1.0},
        "initial": {
            "rho": {"profile": "gaussian", "offset": 0.5, "amplitude": 2.0, "width": 0.15},
            "m": {"profile": "gaussian", "offset": 0.8, "amplitude": 1.0, "width": 0.1,
                  "center": [0.3, 0.7]},
            "c": {"profile": "noise", "offset": 0.5, "amplitude": 0.2},
            "u": {"profile": "noise", "amplitude": 0.05},
        },
        "control": {"dt": 0.01},
    },
}


# --------------------------------------------------------------------------
# parsing

def _deep_merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _build(cls, data: Any, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'document'} must be a mapping, got {type(data).__name__}")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown key {(path + '.' if path else '') + str(key)!r}")
        default = cls().__getattribute__(key)
        if is_dataclass(default):
            kwargs[key] = _build(type(default), value, f"{path}.{key}" if path else key)
        else:
            kwargs[key] = value
    return cls(**kwargs)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    """Enforce every config invariant; returns ``cfg`` for chaining."""
    _require(cfg.preset is None or cfg.preset in PRESET_NAMES, f"unknown preset {cfg.preset!r}")
    _require(isinstance(cfg.seed, int), "seed must be an integer")
    _require(_positive(cfg.t_end), "t_end must be > 0")
    _require(_positive(cfg.sample_interval), "sample_interval must be > 0")
    _require(_positive(cfg.eps_Y), "eps_Y must be > 0")
    _require(len(cfg.g_weights) == 3 and all(_nonneg(w) for w in cfg.g_weights),
             "g_weights must be three nonnegative numbers")
    md = cfg.model
    _require(_nonneg(md.alpha), "alpha must be ≥ 0")
    _require(_nonneg(md.c_s), "c_s must be ≥ 0")
    _require(md.cutoff_eta is None or (0 < md.cutoff_eta < 1), "cutoff_eta must lie in (0, 1)")
    _require(md.advect_scheme in ("upwind1", "central2"), "advect_scheme must be upwind1 or central2")
    _require(_positive(md.proj_tol), "proj_tol must be > 0")
    _require(cfg.phi.profile in ("linear", "quadratic_well", "none"),
             "phi.profile must be linear, quadratic_well or none")
    for name in ("rho", "m", "c"):
        spec = getattr(cfg.initial, name)
        _require(_nonneg(spec.amplitude), f"initial.{name}.amplitude must be ≥ 0")
        _require(_nonneg(spec.offset), f"initial.{name}.offset must be ≥ 0")
    _require(_nonneg(cfg.initial.u.amplitude), "initial.u.amplitude must be ≥ 0")
    _require(cfg.rate_window is None or (len(cfg.rate_window) == 2
                                          and cfg.rate_window[1] > cfg.rate_window[0]),
             "rate_window must be [t0, t1] with t1 > t0")
    if cfg.preset == "bounded_regime" or cfg.name == "bounded_regime":
        _require(md.alpha >= 1.0 / 3.0, "bounded_regime needs alpha ≥ 1/3")
    try:
        grid = cfg.build_grid()
        cfg.build_params(grid)
        cfg.build_control()
        cfg.initial_state(grid)
    except ConfigError:
        raise
    except (KSStokesError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def _positive(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x > 0


def _nonneg(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x) and x >= 0


def config_from_dict(data: dict, overrides: Optional[list[str]] = None) -> ScenarioConfig:
    data = dict(data or {})
    preset = data.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {', '.join(PRESET_NAMES)}")
        data = _deep_merge(PRESETS[preset], data)
    for item in overrides or []:
        data = _deep_merge(data, parse_override(item))
    return validate(_build(ScenarioConfig, data, ""))


def parse_config(text: str, overrides: Optional[list[str]] = None) -> ScenarioConfig:
    """Parse a YAML scenario document; errors carry the offending line."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}: " if mark else ""
        raise ConfigError(f"parse error at {where}{getattr(exc, 'problem', exc)}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    return config_from_dict(data, overrides)


def parse_override(item: str) -> dict:
    """``a.b.c=value`` -> nested dict, value parsed as YAML."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like key=value")
    key, raw = item.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse override value {raw!r}") from exc
    out: dict = {}
    node = out
    parts = key.strip().split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value
    return out


def preset_config(name: str, overrides: Optional[list[str]] = None) -> ScenarioConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return config_from_dict({"preset": name}, overrides)
