"""Ready-made experiment configurations.

Five presets cover the canonical studies:

exp51  order-one Mach number on the unit square: piecewise-constant
       two-square datum far from equilibrium (densities 3/2/1), M=1,
       gamma=9e-4, tau=5e-4; the default 2000 steps reach t=1.
exp52  small Mach numbers on the unit square: radial tanh bubble whose
       amplitude 1/2 + 4M approaches the equilibrium connection as M -> 0;
       same remaining parameters as exp51.
exp53  1D convergence study far from equilibrium on [-1, 1]:
       rho = 1.5 + tanh(2 x / sqrt(gamma)), gamma=1e-3, M=1, tau=h/100;
       relative errors at t=0.0125 against a finest-grid reference.
exp54  1D convergence against the exact stationary interface
       rho = 3/2 + tanh(x / sqrt(2 gamma)) / 2 at M=0.05, tau=h/5, with a
       tight nonlinear tolerance of 1e-11; absolute errors at t=0.25.
exp55  exp53 rerun with the linearized density update.

All presets start at rest.  The artificial-viscosity policy is
mu_h = h * max(||v||_inf, 0.05); the floor is an engineering choice (the
proportional rule degenerates at rest) and is recorded in every manifest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .grid import GridSpec, ScalarField, VectorField
from .model import EnergyModel, InitialData, quartic_double_well
from .solver import NewtonConfig
from .stepper import SchemeParams, VARIANT_LINEARIZED

PRESET_NAMES = ("exp51", "exp52", "exp53", "exp54", "exp55")


@dataclass(frozen=True)
class Preset:
    """A fully assembled run configuration plus study metadata."""

    name: str
    grid: GridSpec
    model: EnergyModel
    initial: InitialData
    params: SchemeParams
    solver: NewtonConfig
    default_steps: int
    measure_time: Optional[float] = None
    error_mode: Optional[str] = None        # 'absolute' | 'relative'
    reference: Optional[str] = None         # 'exact' | 'finest'
    exact_rho: Optional[Callable] = None
    notes: str = ""


def two_square_density(grid: GridSpec) -> ScalarField:
    """Density 3 and 2 on two diamonds (L1 balls), 1 elsewhere."""
    x, y = grid.meshgrid()
    rho = np.ones(grid.shape)
    rho[np.abs(x - 0.75) + np.abs(y - 0.75) <= 0.25] = 2.0
    rho[np.abs(x - 0.25) + np.abs(y - 0.25) <= 0.25] = 3.0
    return ScalarField(grid, rho)


def bubble_density(grid: GridSpec, gamma: float, amplitude_mach: float) -> ScalarField:
    """Radial tanh profile 3/2 - (1/2 + 4 M) tanh(sqrt(2/gamma)(r - 1/4))."""
    amplitude = 0.5 + 4.0 * amplitude_mach
    if amplitude >= 1.5:
        raise ValueError(
            f"bubble amplitude {amplitude} yields nonpositive density; "
            "use amplitude_mach < 0.25")
    x, y = grid.meshgrid()
    r = np.sqrt((x - 0.5) ** 2 + (y - 0.5) ** 2)
    rho = 1.5 - amplitude * np.tanh(np.sqrt(2.0 / gamma) * (r - 0.25))
    return ScalarField(grid, rho)


def front_density(grid: GridSpec, gamma: float) -> ScalarField:
    """1D interface 1.5 + tanh(2 x / sqrt(gamma)), far from equilibrium."""
    (x,) = grid.meshgrid()
    return ScalarField(grid, 1.5 + np.tanh(2.0 * x / math.sqrt(gamma)))


def stationary_profile(gamma: float) -> Callable:
    """Exact stationary interface rho(x) = 3/2 + tanh(x / sqrt(2 gamma)) / 2."""
    scale = 1.0 / math.sqrt(2.0 * gamma)
    return lambda x: 1.5 + 0.5 * np.tanh(scale * np.asarray(x, dtype=float))


def stream_function_velocity(grid: GridSpec, amplitude: float = 30.0,
                             center: tuple = (0.5, 0.5),
                             radius: float = 0.3) -> VectorField:
    """Divergence-free 2D velocity from a compactly supported stream function.

    The stream bump psi = amplitude * max(0, radius^2 - r^2)^2 vanishes on
    several node layers near the boundary, so the centered curl is exactly
    solenoidal for the centered divergence with antisymmetric ghosts (the
    cross differences telescope and no ghost value is ever nonzero).
    """
    if grid.dim != 2:
        raise ValueError("stream-function velocity is 2D only")
    x, y = grid.meshgrid()
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2
    psi = amplitude * np.maximum(0.0, radius**2 - r2) ** 2
    h2 = 2.0 * grid.h
    u = np.zeros(grid.shape)
    w = np.zeros(grid.shape)
    u[:, 1:-1] = (psi[:, 2:] - psi[:, :-2]) / h2
    w[1:-1, :] = -(psi[2:, :] - psi[:-2, :]) / h2
    return VectorField(grid, (u, w))


def well_prepared_data(grid: GridSpec, density: float = 1.5,
                       amplitude: float = 30.0) -> InitialData:
    """Constant density plus a solenoidal stirring velocity.

    Satisfies the discrete compatibility conditions exactly: the potential
    W'(rho) - gamma Lap rho of a constant field is constant, the momentum is
    discretely divergence free, and the density is positive.
    """
    rho = ScalarField.constant(grid, density)
    v = stream_function_velocity(grid, amplitude=amplitude)
    return InitialData(rho=rho, v=v, well_prepared=True)


def _rest(grid: GridSpec) -> VectorField:
    return VectorField.zero(grid)


def preset(name: str, K: Optional[int] = None, M: Optional[float] = None,
           amplitude_mach: Optional[float] = None) -> Preset:
    """Assemble a named experiment at resolution K (preset default if None).

    ``M`` overrides the Mach number.  For exp52, ``amplitude_mach`` decouples
    the datum amplitude 1/2 + 4M from the Mach number of the dynamics (the
    datum becomes nonpositive for amplitude_mach >= 0.25, so sweeping the
    scheme's M up to order one requires pinning the amplitude).
    """
    if name == "exp51":
        K = 40 if K is None else K
        grid = GridSpec(dim=2, K=K)
        gamma = 9e-4
        model = quartic_double_well(gamma)
        params = SchemeParams(mach=1.0 if M is None else M, gamma=gamma, tau=5e-4)
        initial = InitialData(two_square_density(grid), _rest(grid))
        return Preset(name, grid, model, initial, params, NewtonConfig(),
                      default_steps=2000,
                      notes="steps default inferred from t=1 at tau=5e-4")
    if name == "exp52":
        K = 40 if K is None else K
        grid = GridSpec(dim=2, K=K)
        gamma = 9e-4
        mach = 1e-1 if M is None else M
        amp = mach if amplitude_mach is None else amplitude_mach
        model = quartic_double_well(gamma)
        params = SchemeParams(mach=mach, gamma=gamma, tau=5e-4)
        initial = InitialData(bubble_density(grid, gamma, amp), _rest(grid))
        return Preset(name, grid, model, initial, params, NewtonConfig(),
                      default_steps=500)
    if name in ("exp53", "exp55"):
        K = 40 if K is None else K
        grid = GridSpec(dim=1, K=K, lo=-1.0, hi=1.0)
        gamma = 1e-3
        model = quartic_double_well(gamma)
        variant = VARIANT_LINEARIZED if name == "exp55" else "newton"
        params = SchemeParams(mach=1.0 if M is None else M, gamma=gamma,
                              tau=grid.h / 100.0, variant=variant)
        initial = InitialData(front_density(grid, gamma), _rest(grid))
        measure_time = 0.0125
        steps = int(round(measure_time / params.tau))
        return Preset(name, grid, model, initial, params, NewtonConfig(),
                      default_steps=steps, measure_time=measure_time,
                      error_mode="relative", reference="finest")
    if name == "exp54":
        K = 40 if K is None else K
        grid = GridSpec(dim=1, K=K, lo=-1.0, hi=1.0)
        gamma = 1e-3
        model = quartic_double_well(gamma)
        params = SchemeParams(mach=0.05 if M is None else M, gamma=gamma,
                              tau=grid.h / 5.0)
        exact = stationary_profile(gamma)
        initial = InitialData(ScalarField.from_function(grid, exact), _rest(grid))
        measure_time = 0.25
        steps = int(round(measure_time / params.tau))
        return Preset(name, grid, model, initial, params,
                      NewtonConfig(tol_residual=1e-11),
                      default_steps=steps, measure_time=measure_time,
                      error_mode="absolute", reference="exact",
                      exact_rho=exact)
    raise ValueError(f"unknown preset {name!r}; choose from {PRESET_NAMES}")


def with_variant(p: Preset, variant: str) -> Preset:
    return replace(p, params=replace(p.params, variant=variant))
