import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_smooth, random_velocity
from ksstokes.domain import DIRICHLET, Grid, ScalarField, VectorField, integrate
from ksstokes.exceptions import ContractViolation, InvalidParameterError
from ksstokes.fluid import StokesParams
from ksstokes.model import ModelParams, SimState, assemble_rhs, reaction_rates
from ksstokes.sensitivity import SensitivityTensor, eval_sensitivity, rotation_matrix


class TestSensitivity:
    def test_identity_case(self):
        S = SensitivityTensor(c_s=1.7)
        for x in [(0.1, 0.5), (0.9, 0.9)]:
            assert np.allclose(eval_sensitivity(S, x, (1.0, 1.0), 3.0), 1.7 * np.eye(2))

    def test_decay_with_density(self):
        S = SensitivityTensor(c_s=2.0, alpha=1.0 / 3.0, rotation_angle=0.8)
        M = eval_sensitivity(S, (0.5, 0.5, 0.5), (1.0, 1.0, 1.0), 7.0)
        assert np.linalg.norm(M, 2) == pytest.approx(1.0, rel=1e-12)
        assert np.linalg.norm(eval_sensitivity(S, (0.5, 0.5, 0.5), (1.0,) * 3, 1e9), 2) < 2e-3

    def test_zero_in_cutoff_layer(self):
        S = SensitivityTensor(c_s=1.0, rotation_angle=0.3, cutoff_eta=0.1)
        assert not eval_sensitivity(S, (0.05, 0.5), (1.0, 1.0), 1.0).any()
        assert np.allclose(eval_sensitivity(S, (0.5, 0.5), (1.0, 1.0), 0.0), rotation_matrix(2, 0.3))

    def test_cutoff_in_unit_interval(self, rng):
        S = SensitivityTensor(cutoff_eta=0.2)
        coords = tuple(rng.uniform(0, 1, 1000) for _ in range(2))
        r = S.cutoff(coords, (1.0, 1.0))
        assert r.min() >= 0.0 and r.max() <= 1.0

    def test_rotation_is_orthogonal(self):
        for d in (2, 3):
            R = rotation_matrix(d, 1.234)
            assert np.allclose(R @ R.T, np.eye(d))
            assert np.linalg.det(R) == pytest.approx(1.0)

    @pytest.mark.parametrize("kwargs, message", [
        ({"alpha": -1.0}, "alpha must be ≥ 0"),
        ({"c_s": -0.1}, "c_s"),
        ({"cutoff_eta": 1.5}, "cutoff_eta"),
        ({"rotation_angle": math.inf}, "rotation_angle"),
    ])
    def test_invalid(self, kwargs, message):
        with pytest.raises(InvalidParameterError, match=message):
            SensitivityTensor(**kwargs)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_norm_bound_sampled(self, seed):
        r = np.random.default_rng(seed)
        S = SensitivityTensor(c_s=float(r.uniform(0.1, 3)), alpha=float(r.uniform(0, 2)),
                              rotation_angle=float(r.uniform(-4, 4)),
                              cutoff_eta=float(r.uniform(0.01, 0.4)) if r.random() < 0.5 else None)
        d = int(r.integers(2, 4))
        lengths = tuple(r.uniform(0.5, 2.0, d))
        n = 100_000 // 20
        xs = r.uniform(0, 1, (n, d)) * lengths
        rhos = r.exponential(2.0, n)
        R = S.rotation(d)
        opnorm = np.linalg.norm(R, 2)
        scales = S.magnitude(tuple(xs.T), lengths, rhos)
        assert np.all(scales * opnorm <= S.norm_bound(rhos) * (1 + 1e-12))
        for i in range(0, n, 500):
            M = eval_sensitivity(S, xs[i], lengths, rhos[i])
            assert np.linalg.norm(M, 2) <= S.c_s * (1 + rhos[i]) ** (-S.alpha) * (1 + 1e-12)


class TestReaction:
    def test_no_eggs(self, grid2):
        a, b = reaction_rates(ScalarField.constant(grid2, 2.0), ScalarField.constant(grid2, 0.0))
        assert not a.values.any() and not b.values.any()

    def test_pointwise_product(self, grid2):
        a, b = reaction_rates(ScalarField.constant(grid2, 2.0), ScalarField.constant(grid2, 1.0))
        assert np.all(a.values == -2.0) and np.all(b.values == -2.0)


def full_params(grid, rng, **kw):
    S = SensitivityTensor(c_s=1.5, alpha=0.4, rotation_angle=0.9, **kw)
    return ModelParams(S, StokesParams(phi=random_smooth(grid, rng)))


class TestAssembleRhs:
    def test_rest(self, grid2, rng):
        out = assemble_rhs(SimState.rest(grid2), full_params(grid2, rng))
        for f in out[:3]:
            assert not f.values.any()
        assert all(not c.any() for c in out[3].components)

    @pytest.mark.parametrize("angle", [0.0, 0.7, 2.5])
    def test_homogeneous_reduction(self, grid3, angle):
        params = ModelParams(SensitivityTensor(c_s=1.0, rotation_angle=angle))
        state = SimState.from_arrays(grid3, 2.0, 1.0, 1.0)
        rho_dot, m_dot, c_dot, _ = assemble_rhs(state, params)
        assert np.allclose(rho_dot.values, -2.0, atol=1e-14)
        assert np.allclose(m_dot.values, -2.0, atol=1e-14)
        assert np.allclose(c_dot.values, 1.0, atol=1e-14)

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_only_reaction_changes_mass(self, seed):
        r = np.random.default_rng(seed)
        grid = Grid((14, 12))
        rho, m, c = (random_smooth(grid, r) for _ in range(3))
        state = SimState(rho, m, c, random_velocity(grid, r), ScalarField.constant(grid, 0.0))
        rho_dot, m_dot, _, _ = assemble_rhs(state, full_params(grid, r, cutoff_eta=0.1))
        sink = integrate(rho.like(rho.values * m.values))
        assert abs(integrate(rho_dot) + sink) <= 1e-10
        assert abs(integrate(rho_dot) - integrate(m_dot)) <= 1e-10


class TestSimState:
    def test_from_arrays_broadcasts(self, grid2):
        s = SimState.from_arrays(grid2, 1.0, 2.0, 3.0)
        assert s.rho.values.shape == grid2.dims and s.t == 0.0
        assert s.u.divergence_free

    def test_check_rejects_negative(self, grid2):
        s = SimState.from_arrays(grid2, -1.0, 0.0, 0.0)
        with pytest.raises(ContractViolation):
            s.check()

    def test_check_rejects_unflagged_velocity(self, grid2, rng):
        u = VectorField(grid2, tuple(rng.standard_normal(grid2.dims) for _ in range(2)), DIRICHLET)
        s = SimState.from_arrays(grid2, 1.0, 1.0, 1.0, u=u)
        with pytest.raises(ContractViolation):
            s.check()

    def test_check_accepts_projected(self, grid2, rng):
        SimState.from_arrays(grid2, 1.0, 1.0, 1.0, u=random_velocity(grid2, rng)).check()

    def test_evolve_copies(self, grid2):
        s = SimState.rest(grid2)
        s2 = s.evolve(t=1.0)
        assert s.t == 0.0 and s2.t == 1.0

    def test_eval_sensitivity_rejects_negative_density(self):
        with pytest.raises(InvalidParameterError):
            eval_sensitivity(SensitivityTensor(), (0.5, 0.5), (1.0, 1.0), -1.0)
