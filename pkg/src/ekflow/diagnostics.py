"""Discrete functionals, error norms, and experimental convergence orders.

The energy and mass functionals are plain node sums (no h^dim weight) to
match the discrete stability estimates; the h^dim-weighted variants carry a
``_physical`` suffix so the two conventions cannot be mixed silently.  The
energy uses the forward-difference density gradient, which is the form the
timestepper provably controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Union

import numpy as np

from .grid import SYMMETRIC, ScalarField, VectorField
from .model import EnergyModel
from .operators import _grad_forward_array

if TYPE_CHECKING:  # pragma: no cover
    from .stepper import State


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step monitors recorded by the timestepper.

    ``cfl_ratio`` is the timestep divided by the advective stability bound
    evaluated on the pre-step state (0 when at rest); ``cfl_post_ratio`` is
    the a-posteriori variant that also involves the post-step fields.
    ``max_residual`` is the accepted nonlinear (or linear) solve residual.
    """

    t: float
    mass: float
    total_energy: float
    kinetic_energy: float
    newton_iters: int
    max_residual: float
    cfl_ratio: float
    min_density: float
    cfl_post_ratio: float = math.nan


def mass(rho: ScalarField) -> float:
    """Unweighted node sum of the density."""
    return float(np.sum(rho.values))


def _energy_density_sum(rho: ScalarField, v: VectorField, model: EnergyModel,
                        mach: float) -> float:
    grad = _grad_forward_array(rho.values, SYMMETRIC, rho.grid.h)
    grad_sq = np.zeros(rho.grid.shape)
    for g in grad:
        grad_sq += g * g
    local = (model.W(rho.values) + 0.5 * model.gamma * grad_sq) / mach**2
    local = local + 0.5 * rho.values * v.magnitude_sq()
    return float(np.sum(local))


def total_energy(state: "State", model: EnergyModel, mach: float) -> float:
    """Node sum of (W(rho) + gamma/2 |forward grad rho|^2)/M^2 + rho |v|^2 / 2."""
    return _energy_density_sum(state.rho, state.v, model, mach)


def total_energy_physical(state: "State", model: EnergyModel, mach: float) -> float:
    """h^dim-weighted total energy (approximates the domain integral)."""
    g = state.rho.grid
    return g.h**g.dim * _energy_density_sum(state.rho, state.v, model, mach)


def kinetic_energy(state: "State") -> float:
    """Node sum of rho |v|^2 / 2."""
    return 0.5 * float(np.sum(state.rho.values * state.v.magnitude_sq()))


def kinetic_energy_physical(state: "State") -> float:
    g = state.rho.grid
    return g.h**g.dim * kinetic_energy(state)


FieldLike = Union[ScalarField, VectorField]


def _component_arrays(f: FieldLike):
    if isinstance(f, ScalarField):
        return (f.values,)
    return f.components


def _restrict(arr: np.ndarray, stride: int) -> np.ndarray:
    if arr.ndim == 1:
        return arr[::stride]
    return arr[::stride, ::stride]


def l2_error(f: FieldLike, ref: FieldLike, mode: str = "absolute") -> float:
    """Discrete L2 distance sqrt(h^dim sum |f - ref|^2), optionally relative.

    ``ref`` may live on a nested finer grid whose cell count is a multiple
    of the coarse one; it is then restricted by nodal sampling at the
    coincident points.  Relative mode divides by the norm of the
    (restricted) reference and rejects zero-norm references.
    """
    if mode not in ("absolute", "relative"):
        raise ValueError(f"unknown mode {mode!r}")
    gf, gr = f.grid, ref.grid
    if (gf.dim, gf.lo, gf.hi) != (gr.dim, gr.lo, gr.hi):
        raise ValueError("fields live on incompatible domains")
    if gr.K % gf.K != 0:
        raise ValueError(
            f"reference resolution {gr.K} is not a multiple of {gf.K}")
    stride = gr.K // gf.K
    weight = gf.h**gf.dim
    diff_sq = 0.0
    ref_sq = 0.0
    for a, b in zip(_component_arrays(f), _component_arrays(ref)):
        b = _restrict(b, stride)
        diff_sq += float(np.sum((a - b) ** 2))
        ref_sq += float(np.sum(b**2))
    err = math.sqrt(weight * diff_sq)
    if mode == "absolute":
        return err
    ref_norm = math.sqrt(weight * ref_sq)
    if ref_norm == 0.0:
        raise ValueError("relative error is not meaningful for a zero reference")
    return err / ref_norm


def eoc(errors) -> list:
    """Convergence orders log2(e_K / e_2K) for a doubling resolution sequence."""
    pairs = list(errors)
    if len(pairs) < 2:
        raise ValueError("need at least two (K, error) pairs")
    orders = []
    for (k0, e0), (k1, e1) in zip(pairs[:-1], pairs[1:]):
        if k1 != 2 * k0:
            raise ValueError(f"resolutions must double: got {k0} -> {k1}")
        if e0 <= 0.0 or e1 <= 0.0:
            raise ValueError("errors must be positive")
        orders.append(math.log(e0 / e1) / math.log(2.0))
    return orders
