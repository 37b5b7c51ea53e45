import numpy as np
import pytest

from ksstokes.domain import DIRICHLET, Grid, ScalarField, VectorField
from ksstokes.fluid import leray_project
from ksstokes.scenario_io import config_from_dict


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid2():
    return Grid((24, 20), (1.0, 0.8))


@pytest.fixture
def grid3():
    return Grid((8, 10, 6), (1.0, 1.2, 0.7))


def random_smooth(grid, rng, offset=1.0, amplitude=0.5, modes=3):
    """Positive field built from random low cosine modes."""
    coords = grid.cell_centers()
    out = np.zeros(grid.dims)
    for ks in np.ndindex(*([modes + 1] * grid.ndim)):
        mode = np.ones(grid.dims)
        for x, k, L in zip(coords, ks, grid.lengths):
            mode = mode * np.cos(k * np.pi * x / L)
        out += rng.uniform(-1, 1) / (1 + sum(ks)) * mode
    out *= amplitude / np.abs(out).max()
    return ScalarField(grid, offset + out)


def random_velocity(grid, rng, scale=1.0):
    raw = VectorField(grid, tuple(scale * rng.standard_normal(grid.dims) for _ in range(grid.ndim)), DIRICHLET)
    return leray_project(raw)[0]


def random_scenario(seed: int, dims=(24, 24), t_end=1.0):
    """Seeded random scenario config: random parameters and noisy initial data."""
    r = np.random.default_rng(seed)
    return config_from_dict({
        "name": f"random_{seed}", "seed": seed, "t_end": t_end, "sample_interval": 0.05,
        "grid": {"dims": list(dims)},
        "model": {"c_s": float(r.uniform(0.2, 2.0)), "alpha": float(r.uniform(0, 1.5)),
                  "rotation_angle": float(r.uniform(-np.pi, np.pi)),
                  "cutoff_eta": float(r.uniform(0.05, 0.2)) if r.random() < 0.5 else None},
        "phi": {"profile": str(r.choice(["linear", "quadratic_well"])), "strength": float(r.uniform(0.5, 2))},
        "initial": {
            "rho": {"profile": "noise", "offset": float(r.uniform(0.5, 2)), "amplitude": float(r.uniform(0, 0.4))},
            "m": {"profile": "gaussian", "offset": float(r.uniform(0.1, 1)), "amplitude": float(r.uniform(0, 2)),
                  "width": float(r.uniform(0.05, 0.2)), "center": [float(v) for v in r.uniform(0.2, 0.8, 2)]},
            "c": {"profile": "noise", "offset": float(r.uniform(0.3, 1)), "amplitude": float(r.uniform(0, 0.3))},
            "u": {"profile": "noise", "amplitude": float(r.uniform(0, 0.2))},
        },
        "control": {"dt": 0.01},
    })


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def report_criterion(number: int, title: str, passed: bool, detail: str) -> str:
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
