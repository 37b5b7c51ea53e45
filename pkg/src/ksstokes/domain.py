"""Box geometry, cell-centred field storage and discrete integrals."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import InvalidParameterError


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centred grid on the box ``[0, L_1] x ... x [0, L_d]``."""

    dims: tuple[int, ...]
    lengths: tuple[float, ...]

    def __init__(self, dims: Sequence[int], lengths: Sequence[float] | None = None):
        dims = tuple(int(n) for n in dims)
        if lengths is None:
            lengths = (1.0,) * len(dims)
        lengths = tuple(float(x) for x in lengths)
        if len(dims) not in (2, 3):
            raise InvalidParameterError(f"grid must have 2 or 3 axes, got {len(dims)}")
        if len(lengths) != len(dims):
            raise InvalidParameterError("dims and lengths differ in length")
        if any(n < 4 for n in dims):
            raise InvalidParameterError(f"every extent must be >= 4, got {dims}")
        if any(not (x > 0 and math.isfinite(x)) for x in lengths):
            raise InvalidParameterError(f"lengths must be positive, got {lengths}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lengths", lengths)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.dims))

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.spacing)

    @property
    def volume(self) -> float:
        return math.prod(self.lengths)

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    def axis_centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.dims[axis]) + 0.5) * h

    def cell_centers(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of shape ``dims`` (``ij`` indexing)."""
        return tuple(np.meshgrid(*(self.axis_centers(a) for a in range(self.ndim)), indexing="ij"))

    def face_centers(self, axis: int) -> tuple[np.ndarray, ...]:
        """Coordinates of the ``dims[axis] + 1`` faces normal to ``axis``."""
        axes = []
        for a in range(self.ndim):
            if a == axis:
                axes.append(np.arange(self.dims[a] + 1) * self.spacing[a])
            else:
                axes.append(self.axis_centers(a))
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def zeros(self) -> np.ndarray:
        return np.zeros(self.dims)


class BoundaryCondition(enum.Enum):
    NEUMANN_ZERO = "neumann"
    DIRICHLET_ZERO = "dirichlet"


NEUMANN = BoundaryCondition.NEUMANN_ZERO
DIRICHLET = BoundaryCondition.DIRICHLET_ZERO


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray
    bc: BoundaryCondition = NEUMANN

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.size != self.grid.size:
            raise InvalidParameterError(
                f"field has {values.size} values, grid has {self.grid.size} cells"
            )
        self.values = values.reshape(self.grid.dims)

    @classmethod
    def constant(cls, grid: Grid, value: float, bc: BoundaryCondition = NEUMANN) -> "ScalarField":
        return cls(grid, np.full(grid.dims, float(value)), bc)

    @classmethod
    def from_function(cls, grid: Grid, func, bc: BoundaryCondition = NEUMANN) -> "ScalarField":
        return cls(grid, np.broadcast_to(func(*grid.cell_centers()), grid.dims).copy(), bc)

    def like(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values, self.bc)

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy(), self.bc)

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


@dataclass
class VectorField:
    grid: Grid
    components: tuple[np.ndarray, ...]
    bc: BoundaryCondition = DIRICHLET
    divergence_free: bool = False

    def __post_init__(self):
        comps = tuple(np.asarray(c, dtype=np.float64).reshape(self.grid.dims) for c in self.components)
        if len(comps) != self.grid.ndim:
            raise InvalidParameterError(
                f"need {self.grid.ndim} components, got {len(comps)}"
            )
        self.components = comps

    @classmethod
    def zeros(cls, grid: Grid, divergence_free: bool = True) -> "VectorField":
        return cls(grid, tuple(grid.zeros() for _ in range(grid.ndim)), DIRICHLET, divergence_free)

    def component(self, axis: int) -> ScalarField:
        return ScalarField(self.grid, self.components[axis], self.bc)

    def magnitude(self) -> np.ndarray:
        return np.sqrt(sum(c * c for c in self.components))

    def copy(self) -> "VectorField":
        return VectorField(self.grid, tuple(c.copy() for c in self.components), self.bc, self.divergence_free)

    def is_finite(self) -> bool:
        return all(np.isfinite(c).all() for c in self.components)


def integrate(f: ScalarField) -> float:
    """Midpoint-rule integral over the box."""
    return float(f.values.sum() * f.grid.cell_volume)


def mean(f: ScalarField) -> float:
    return integrate(f) / f.grid.volume


def lp_norm(f: ScalarField, p: float = 2.0) -> float:
    if p == math.inf:
        return float(np.abs(f.values).max())
    if not p >= 1:
        raise InvalidParameterError(f"p must be >= 1 or inf, got {p}")
    a = np.abs(f.values)
    if p == 1:
        return float(a.sum() * f.grid.cell_volume)
    if p == 2:
        return float(math.sqrt((a * a).sum() * f.grid.cell_volume))
    return float(((a**p).sum() * f.grid.cell_volume) ** (1.0 / p))


def inner(f: ScalarField, g: ScalarField) -> float:
    """Discrete L2 inner product."""
    return float((f.values * g.values).sum() * f.grid.cell_volume)


def vector_l2(v: VectorField) -> float:
    return math.sqrt(sum(float((c * c).sum()) for c in v.components) * v.grid.cell_volume)


def vector_linf(v: VectorField) -> float:
    return float(v.magnitude().max())
