"""Thermodynamic closure: double-well free energy and its convex splitting.

The local free energy W(rho) is non-convex (two wells at the bulk phase
densities); the timestepper relies on writing it as a difference W = U - V
of two convex functions, taking U' implicitly and V' explicitly.  The model
object carries both halves with first and second derivatives.

``kappa_V`` is a claimed lower bound on V'' over the admissible density
range; it never enters the update and is kept for monitoring only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import ScalarField, VectorField


@dataclass(frozen=True)
class EnergyModel:
    U: Callable
    dU: Callable
    d2U: Callable
    V: Callable
    dV: Callable
    d2V: Callable
    gamma: float
    kappa_V: float
    admissible_range: tuple = (0.25, 4.0)
    description: str = ""

    def W(self, rho):
        return self.U(rho) - self.V(rho)

    def dW(self, rho):
        return self.dU(rho) - self.dV(rho)

    def d2W(self, rho):
        return self.d2U(rho) - self.d2V(rho)


def quartic_double_well(gamma: float, rho_lo: float = 0.5,
                        admissible_range: tuple = (0.25, 4.0)) -> EnergyModel:
    """Double well (rho-1)^2 (rho-2)^2 split as U - V.

    U(rho) = rho^4 + 13 rho^2 + 4 and V(rho) = 6 rho^3 + 12 rho; U is
    globally convex (U'' >= 26) and V is convex for rho > 0.  V'' = 36 rho
    has no uniform positive lower bound on (0, inf), so kappa_V is reported
    for the configurable floor rho_lo.
    """
    return EnergyModel(
        U=lambda r: r**4 + 13.0 * r**2 + 4.0,
        dU=lambda r: 4.0 * r**3 + 26.0 * r,
        d2U=lambda r: 12.0 * r**2 + 26.0,
        V=lambda r: 6.0 * r**3 + 12.0 * r,
        dV=lambda r: 18.0 * r**2 + 12.0,
        d2V=lambda r: 36.0 * r,
        gamma=float(gamma),
        kappa_V=36.0 * rho_lo,
        admissible_range=admissible_range,
        description="quartic double well (rho-1)^2 (rho-2)^2",
    )


def pressure(model: EnergyModel, rho):
    """Thermodynamic pressure rho W'(rho) - W(rho); diagnostic only."""
    arr = np.asarray(rho, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("pressure requires positive density")
    p = arr * model.dW(arr) - model.W(arr)
    return float(p) if np.isscalar(rho) else p


@dataclass(frozen=True)
class InitialData:
    """Initial density/velocity pair; density must be strictly positive."""

    rho: ScalarField
    v: VectorField
    well_prepared: bool = False

    def __post_init__(self):
        if float(np.min(self.rho.values)) <= 0.0:
            raise ValueError("initial density must be strictly positive")
        if self.rho.grid != self.v.grid:
            raise ValueError("initial fields live on different grids")
