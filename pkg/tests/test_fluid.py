import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_smooth, random_velocity
from ksstokes.diagnostics import fit_rate
from ksstokes.domain import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField, lp_norm, mean, vector_l2
from ksstokes.exceptions import InvalidParameterError, SolverError
from ksstokes.fluid import StokesParams, buoyancy, leray_project, stokes_eigenvalue, stokes_mode, stokes_step
from ksstokes.operators import divergence, gradient


def maxabs(v):
    return max(float(np.abs(c).max()) for c in v.components)


class TestLerayProjection:
    def test_divergence_free_output(self, grid3, rng):
        v = VectorField(grid3, tuple(rng.standard_normal(grid3.dims) for _ in range(3)), DIRICHLET)
        w, q = leray_project(v)
        assert w.divergence_free
        assert np.abs(divergence(w).values).max() <= 1e-9
        assert abs(mean(q)) <= 1e-12

    def test_idempotent(self, grid2, rng):
        w = random_velocity(grid2, rng)
        w2, q2 = leray_project(w)
        assert maxabs(VectorField(grid2, tuple(a - b for a, b in zip(w.components, w2.components)))) <= 1e-9
        assert np.abs(q2.values).max() <= 1e-9

    def test_annihilates_gradients(self, grid2, rng):
        f = random_smooth(grid2, rng)
        w, _ = leray_project(gradient(f))
        assert maxabs(w) <= 1e-8

    def test_decomposition_recovers_input(self, grid2, rng):
        v = VectorField(grid2, tuple(rng.standard_normal(grid2.dims) for _ in range(2)), DIRICHLET)
        w, q = leray_project(v)
        gq = gradient(q)
        for vc, wc, gc in zip(v.components, w.components, gq.components):
            assert np.abs(vc - wc - gc).max() <= 1e-9

    def test_orthogonal(self, grid2, rng):
        v = VectorField(grid2, tuple(rng.standard_normal(grid2.dims) for _ in range(2)), DIRICHLET)
        w, _ = leray_project(v)
        assert vector_l2(w) <= vector_l2(v)

    def test_tolerance_violation_raises(self, grid2, rng):
        v = VectorField(grid2, tuple(rng.standard_normal(grid2.dims) for _ in range(2)), DIRICHLET)
        with pytest.raises(SolverError):
            leray_project(v, proj_tol=1e-30)


class TestBuoyancy:
    def test_constant_potential(self, grid2, rng):
        f = buoyancy(random_smooth(grid2, rng), random_smooth(grid2, rng), ScalarField.constant(grid2, 3.0))
        assert maxabs(f) == 0.0

    def test_no_gametes(self, grid2, rng):
        z = ScalarField.constant(grid2, 0.0)
        assert maxabs(buoyancy(z, z, random_smooth(grid2, rng))) == 0.0

    def test_linear_potential(self):
        g = Grid((8, 8, 8))
        one = ScalarField.constant(g, 1.0)
        phi = ScalarField(g, g.cell_centers()[0])
        fx, fy, fz = buoyancy(one, one, phi).components
        interior = (slice(1, -1),) * 3
        assert np.abs(fx[interior] - 2.0).max() <= 1e-10
        assert np.abs(fy).max() <= 1e-10 and np.abs(fz).max() <= 1e-10


class TestStokesStep:
    def test_rest_state(self, grid2):
        z = ScalarField.constant(grid2, 0.0)
        phi = ScalarField(grid2, grid2.cell_centers()[0])
        u, p = stokes_step(VectorField.zeros(grid2), z, z, 0.01, StokesParams(phi=phi))
        assert maxabs(u) <= 1e-10 and np.abs(p.values).max() <= 1e-10

    def test_gradient_forcing_leaves_fluid_at_rest(self, grid2, rng):
        rho = ScalarField.constant(grid2, 1.3)
        m = ScalarField.constant(grid2, 0.4)
        phi = random_smooth(grid2, rng)
        u, p = stokes_step(VectorField.zeros(grid2), rho, m, 0.05, StokesParams(phi=phi))
        assert maxabs(u) <= 1e-8
        # the pressure balances the potential force
        assert np.abs(p.values - (1.7 * (phi.values - mean(phi)))).max() <= 1e-8

    def test_pressure_mean_zero_and_flag(self, grid2, rng):
        phi = ScalarField(grid2, grid2.cell_centers()[1])
        u, p = stokes_step(random_velocity(grid2, rng), random_smooth(grid2, rng),
                           random_smooth(grid2, rng), 0.01, StokesParams(phi=phi))
        assert u.divergence_free
        assert np.abs(divergence(u).values).max() <= 1e-9
        assert abs(mean(p)) <= 1e-12

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), dt=st.floats(1e-3, 0.2))
    def test_unforced_component_energy_nonincreasing(self, seed, dt):
        grid = Grid((16, 12))
        u = random_velocity(grid, np.random.default_rng(seed))
        z = ScalarField.constant(grid, 0.0)
        new, _ = stokes_step(u, z, z, dt, StokesParams())
        for a in range(2):
            before = lp_norm(ScalarField(grid, u.components[a], DIRICHLET), 2)
            after = lp_norm(ScalarField(grid, new.components[a], DIRICHLET), 2)
            assert after <= before * (1 + 1e-12)

    def test_slowest_mode_decays_at_stokes_eigenvalue(self):
        grid = Grid((16, 16))
        lam = stokes_eigenvalue(grid)
        u = stokes_mode(grid)
        z = ScalarField.constant(grid, 0.0)
        dt, series = 1e-3, [(0.0, vector_l2(u))]
        for k in range(1, 41):
            u, _ = stokes_step(u, z, z, dt, StokesParams())
            series.append((k * dt, vector_l2(u)))
        assert all(b < a for (_, a), (_, b) in zip(series, series[1:]))
        rate = fit_rate(series, (0.0, 0.04)).rate
        assert rate == pytest.approx(lam, rel=0.15)

    def test_forced_energy_ratio_finite(self, grid2, rng):
        phi = ScalarField(grid2, grid2.cell_centers()[0] ** 2)
        rho, m = random_smooth(grid2, rng), random_smooth(grid2, rng)
        u = VectorField.zeros(grid2)
        dt = 0.01
        for _ in range(5):
            new, _ = stokes_step(u, rho, m, dt, StokesParams(phi=phi))
            K = (vector_l2(new) ** 2 - vector_l2(u) ** 2) / (dt * (lp_norm(rho, 2) ** 2 + lp_norm(m, 2) ** 2))
            assert np.isfinite(K)
            u = new

    def test_rejects_bad_dt(self, grid2):
        z = ScalarField.constant(grid2, 0.0)
        with pytest.raises(InvalidParameterError):
            stokes_step(VectorField.zeros(grid2), z, z, 0.0, StokesParams())


class TestStokesParams:
    def test_viscosity_fixed(self):
        with pytest.raises(InvalidParameterError):
            StokesParams(nu=2.0)

    def test_proj_tol_positive(self):
        with pytest.raises(InvalidParameterError):
            StokesParams(proj_tol=0.0)

    def test_phi_finite(self, grid2):
        with pytest.raises(InvalidParameterError):
            StokesParams(phi=ScalarField(grid2, np.full(grid2.dims, np.nan), NEUMANN))


class TestStokesEigenvalue:
    def test_converges_toward_continuum(self):
        l16, l32 = stokes_eigenvalue(Grid((16, 16))), stokes_eigenvalue(Grid((32, 32)))
        # unit-square clamped Stokes value is about 52.3
        assert 50.0 < l16 < l32 < 52.4

    def test_exceeds_dirichlet_laplacian(self):
        g = Grid((16, 16))
        assert stokes_eigenvalue(g) > 2 * np.pi**2
