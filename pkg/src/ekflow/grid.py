"""Cartesian node grids, nodal fields, and ghost-cell extension.

Fields live on the nodes of a uniform grid with indices {0..K} per
direction.  Boundary conditions enter exclusively through a one-layer ghost
extension with reflection parity:

* ``symmetric``      -- the ghost copies the adjacent interior value
  (zero normal derivative; used for density and chemical potential),
* ``antisymmetric``  -- the ghost negates it (weakly enforced zero value;
  used for velocity and momentum-like fluxes).

Corner ghosts (e.g. index (-1,-1)) are never read by any axis-aligned
stencil in this package; the extension sets them to zero defensively.

Fields are immutable value objects: the wrapped arrays are copies with the
writeable flag cleared, so they can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

SYMMETRIC = "symmetric"
ANTISYMMETRIC = "antisymmetric"
_PARITIES = (SYMMETRIC, ANTISYMMETRIC)


class NonFiniteFieldError(ValueError):
    """A field was constructed with NaN or infinite entries."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian grid on [lo, hi]^dim with K cells per direction.

    Nodes are indexed 0..K per direction; the node coordinate of index i is
    exactly ``lo + i*h`` with ``h = (hi - lo)/K``.
    """

    dim: int
    K: int
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.K < 2:
            raise ValueError(f"need at least 2 cells per direction, got K={self.K}")
        if not self.hi > self.lo:
            raise ValueError("domain must have positive extent")

    @property
    def h(self) -> float:
        return (self.hi - self.lo) / self.K

    @property
    def shape(self) -> tuple:
        return (self.K + 1,) * self.dim

    @property
    def n_nodes(self) -> int:
        return (self.K + 1) ** self.dim

    def coords(self) -> np.ndarray:
        """Node coordinates along one axis, length K+1."""
        return self.lo + self.h * np.arange(self.K + 1)

    def meshgrid(self) -> tuple:
        """Coordinate arrays of shape ``self.shape`` ('ij' indexing)."""
        axes = (self.coords(),) * self.dim
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def boundary_mask(self) -> np.ndarray:
        """Boolean array marking nodes with some index in {0, K}."""
        mask = np.zeros(self.shape, dtype=bool)
        for axis in range(self.dim):
            sl_lo = [slice(None)] * self.dim
            sl_hi = [slice(None)] * self.dim
            sl_lo[axis] = 0
            sl_hi[axis] = -1
            mask[tuple(sl_lo)] = True
            mask[tuple(sl_hi)] = True
        return mask

    def boundary_multiplicity(self) -> np.ndarray:
        """Number of axes along which each node touches the boundary.

        Edge nodes have multiplicity 1, 2D corner nodes 2, interior 0.
        """
        mult = np.zeros(self.shape, dtype=int)
        for axis in range(self.dim):
            sl_lo = [slice(None)] * self.dim
            sl_hi = [slice(None)] * self.dim
            sl_lo[axis] = 0
            sl_hi[axis] = -1
            mult[tuple(sl_lo)] += 1
            mult[tuple(sl_hi)] += 1
        return mult

    def index_sets(self) -> "BoundaryIndexSets":
        return BoundaryIndexSets.for_grid(self)


@dataclass(frozen=True)
class BoundaryIndexSets:
    """Boundary nodes and the one-layer ghost halo, as index tuples."""

    boundary: frozenset
    extended_boundary: frozenset

    @classmethod
    def for_grid(cls, grid: GridSpec) -> "BoundaryIndexSets":
        K = grid.K
        if grid.dim == 1:
            boundary = frozenset({(0,), (K,)})
            ghosts = frozenset({(-1,), (K + 1,)})
        else:
            rng = range(0, K + 1)
            boundary = frozenset(
                (i, j) for i in rng for j in rng if i in (0, K) or j in (0, K)
            )
            ext = range(-1, K + 2)
            ghosts = frozenset(
                (i, j)
                for i in ext
                for j in ext
                if i in (-1, K + 1) or j in (-1, K + 1)
            )
        return cls(boundary=boundary, extended_boundary=ghosts)


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ScalarField:
    """Real values on every node of a grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = _freeze(self.values)
        if values.shape != self.grid.shape:
            raise ValueError(
                f"field shape {values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteFieldError("field contains non-finite entries")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: GridSpec, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> "ScalarField":
        """Sample ``fn(x)`` / ``fn(x, y)`` at the nodes."""
        return cls(grid, np.asarray(fn(*grid.meshgrid()), dtype=float))


@dataclass(frozen=True)
class VectorField:
    """One array per spatial component, each on every node of a grid."""

    grid: GridSpec
    components: tuple = field(default=())

    def __post_init__(self):
        comps = tuple(_freeze(c) for c in self.components)
        if len(comps) != self.grid.dim:
            raise ValueError(
                f"expected {self.grid.dim} components, got {len(comps)}"
            )
        for c in comps:
            if c.shape != self.grid.shape:
                raise ValueError(
                    f"component shape {c.shape} does not match grid {self.grid.shape}"
                )
            if not np.all(np.isfinite(c)):
                raise NonFiniteFieldError("field contains non-finite entries")
        object.__setattr__(self, "components", comps)

    @classmethod
    def zero(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, tuple(np.zeros(grid.shape) for _ in range(grid.dim)))

    @classmethod
    def from_arrays(cls, grid: GridSpec, *comps) -> "VectorField":
        return cls(grid, tuple(np.asarray(c, dtype=float) for c in comps))

    def magnitude_sq(self) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        for c in self.components:
            out = out + c * c
        return out

    def max_norm(self) -> float:
        return max((float(np.max(np.abs(c))) for c in self.components), default=0.0)


Field = Union[ScalarField, VectorField]


def extend_array(values: np.ndarray, parity: str) -> np.ndarray:
    """Ghost-extend a nodal array by one layer with the given parity.

    Returns an array two entries larger per axis; position [1:-1, ...] holds
    the original values.  Face ghosts mirror the adjacent interior value
    (sign-flipped for ``antisymmetric``); corner ghosts are set to zero.
    """
    if parity not in _PARITIES:
        raise ValueError(f"unknown parity {parity!r}")
    sign = 1.0 if parity == SYMMETRIC else -1.0
    if values.ndim == 1:
        ext = np.zeros(values.shape[0] + 2)
        ext[1:-1] = values
        ext[0] = sign * values[0]
        ext[-1] = sign * values[-1]
        return ext
    ext = np.zeros((values.shape[0] + 2, values.shape[1] + 2))
    ext[1:-1, 1:-1] = values
    ext[0, 1:-1] = sign * values[0, :]
    ext[-1, 1:-1] = sign * values[-1, :]
    ext[1:-1, 0] = sign * values[:, 0]
    ext[1:-1, -1] = sign * values[:, -1]
    return ext


def extend(field: Field, parity: str):
    """Ghost-extend a field; scalar -> array, vector -> tuple of arrays."""
    if isinstance(field, ScalarField):
        return extend_array(field.values, parity)
    return tuple(extend_array(c, parity) for c in field.components)


def mean_subtract(field: ScalarField) -> ScalarField:
    """Project onto mean-zero fields by subtracting the nodal average."""
    return ScalarField(field.grid, field.values - np.mean(field.values))
