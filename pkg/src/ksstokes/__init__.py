"""Keller-Segel-Stokes coral-fertilisation simulator and verification harness."""

from .diagnostics import (DiagnosticsRecord, EquilibriumSpec, GWeights, InvariantBudget,
                          InvariantReport, RateFit, check_invariants, equilibrium, fit_rate,
                          monotone_after, record)
from .domain import (DIRICHLET, NEUMANN, BoundaryCondition, Grid, ScalarField, VectorField,
                     inner, integrate, lp_norm, mean, vector_l2, vector_linf)
from .estimators import ExponentialDecayRegressor, KellerSegelStokes
from .exceptions import (ConfigError, ContractViolation, InvalidParameterError, InvalidWindowError,
                         KSStokesError, SnapshotFormatError, SolverError, StabilityError)
from .fluid import StokesParams, buoyancy, leray_project, stokes_eigenvalue, stokes_step
from .model import ModelParams, SimState, assemble_rhs, reaction_rates
from .operators import (StencilSpec, advect, chemo_flux_div, conjugate_gradient, diffuse_implicit,
                        divergence, gradient, laplacian, neumann_eigenvalue)
from .oracle import DenseSemigroup, HomogeneousSolution, dense_semigroup, homogeneous_exact
from .scenario_io import parse_config, preset_config, read_csv, read_snapshot, run, write_snapshot
from .sensitivity import SensitivityTensor, eval_sensitivity
from .timestepper import StepControl, advance_to, stable_dt, step, step_detailed

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
