"""One timestep of the semi-implicit all-speed scheme.

Unknowns are the density rho, velocity v and the chemical potential
Lambda = U'(rho) - V'(rho_old) - gamma Lap rho (convex splitting: the convex
part U' is implicit, V' explicit).  A step consists of

1. the explicit momentum flux
       Phi = rho v - tau * adv(rho, v) + mu_h tau * Lap v,
   where adv is the average-flux advection divergence and mu_h an
   artificial viscosity (by default proportional to h ||v||_inf with a
   configurable floor, since all experiments start at rest),
2. the implicit density update obtained by eliminating the momentum:
       rho_new - (tau^2/M^2) div(rho_old grad Lambda(rho_new))
           = rho_old - tau div(Phi),
   a single nonlinear system in rho_new solved by Newton (or, in the
   'linearized' variant, with U'(rho_new) replaced by its tangent at
   rho_old, a single linear solve),
3. the explicit velocity update
       v_new = (Phi - rho_old (tau/M^2) grad Lambda_new) / rho_new.

Ghost parities: rho and Lambda extend symmetrically wherever they appear
alone; velocity, the flux Phi and the product rho_old grad Lambda extend
antisymmetrically inside divergences.  With these parities the divergence
sums telescope, so every step conserves the nodal density sum up to the
solve tolerance.

Both centered divergence sums in the update telescope to zero under the
antisymmetric extension, hence mass conservation holds for either variant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .diagnostics import StepDiagnostics, kinetic_energy, mass, total_energy
from .grid import ANTISYMMETRIC, SYMMETRIC, GridSpec, ScalarField, VectorField
from .model import EnergyModel
from .operators import (
    _div_centered_array,
    _grad_centered_array,
    _laplacian_array,
    div_advection,
    laplacian5_components,
    sparse_divergence,
    sparse_gradient,
    sparse_laplacian,
)
from .solver import (
    NewtonConfig,
    NewtonResult,
    SolverError,
    SparseOperator,
    linear_solve,
    newton_solve,
)

log = logging.getLogger(__name__)

MU_FIXED = "fixed"
MU_PROPORTIONAL = "proportional"
MONITOR_OFF = "off"
MONITOR_WARN = "warn"
MONITOR_ABORT = "abort"
VARIANT_NEWTON = "newton"
VARIANT_LINEARIZED = "linearized"


class PositivityError(SolverError):
    def __init__(self, node, value):
        super().__init__(f"density {value:.6e} <= 0 at node {node}")
        self.node = node
        self.value = value


class CflViolationError(SolverError):
    pass


@dataclass(frozen=True)
class SchemeParams:
    """Physical and policy parameters of one run.

    ``mu_value`` is the fixed viscosity for the 'fixed' policy and the
    velocity floor for the 'proportional' policy mu_h = h max(||v||, floor).
    """

    mach: float
    gamma: float
    tau: float
    mu_policy: str = MU_PROPORTIONAL
    mu_value: float = 0.05
    cfl_monitor: str = MONITOR_WARN
    range_monitor: str = MONITOR_WARN
    variant: str = VARIANT_NEWTON

    def __post_init__(self):
        if min(self.mach, self.gamma, self.tau) <= 0.0:
            raise ValueError("mach, gamma and tau must be positive")
        if self.mu_value < 0.0:
            raise ValueError("mu_value must be nonnegative")
        if self.mu_policy not in (MU_FIXED, MU_PROPORTIONAL):
            raise ValueError(f"unknown mu policy {self.mu_policy!r}")
        for m in (self.cfl_monitor, self.range_monitor):
            if m not in (MONITOR_OFF, MONITOR_WARN, MONITOR_ABORT):
                raise ValueError(f"unknown monitor policy {m!r}")
        if self.variant not in (VARIANT_NEWTON, VARIANT_LINEARIZED):
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class State:
    """Fields at one time level; immutable, advance() returns a new one."""

    rho: ScalarField
    v: VectorField
    lam: Optional[ScalarField] = None
    t: float = 0.0
    n: int = 0

    def __post_init__(self):
        if self.rho.grid != self.v.grid:
            raise ValueError("state fields live on different grids")
        if float(np.min(self.rho.values)) <= 0.0:
            idx = np.unravel_index(int(np.argmin(self.rho.values)), self.rho.grid.shape)
            raise PositivityError(idx, float(np.min(self.rho.values)))

    @property
    def grid(self) -> GridSpec:
        return self.rho.grid


def artificial_viscosity(state: State, params: SchemeParams) -> float:
    if params.mu_policy == MU_FIXED:
        return params.mu_value
    return state.grid.h * max(state.v.max_norm(), params.mu_value)


def cfl_bound(state: State) -> float:
    """Advective timestep bound h/||v|| * rho_min / (9 ||rho||^2 + 8)."""
    vmax = state.v.max_norm()
    if vmax == 0.0:
        return math.inf
    rho = state.rho.values
    rho_min = float(np.min(rho))
    rho_max = float(np.max(np.abs(rho)))
    return state.grid.h / vmax * rho_min / (9.0 * rho_max**2 + 8.0)


def cfl_bound_posteriori(old: State, new: State) -> float:
    """A-posteriori bound involving both time levels (logged, never enforced)."""
    vn = old.v.max_norm()
    if vn == 0.0:
        return 0.0
    vn1 = new.v.max_norm()
    rho_min = float(np.min(old.rho.values))
    rho1_max = float(np.max(np.abs(new.rho.values)))
    denom = 8.0 * (2.0 * rho1_max**2 * (vn + vn1) ** 2 + vn**2)
    return old.grid.h * vn * rho_min / denom


def explicit_flux(state: State, params: SchemeParams, mu_h: float) -> VectorField:
    """Momentum flux Phi = rho v - tau adv(rho, v) + mu_h tau Lap v."""
    adv = div_advection(state.rho, state.v)
    lap = laplacian5_components(state.v, ANTISYMMETRIC)
    comps = tuple(
        state.rho.values * vc - params.tau * ac + mu_h * params.tau * lc
        for vc, ac, lc in zip(state.v.components, adv.components, lap.components)
    )
    return VectorField(state.grid, comps)


class ImplicitDensitySystem:
    """Eliminated implicit system for the new density, plus its Jacobian.

    residual(rho) = rho - (tau^2/M^2) div(rho_old grad Lambda(rho))
                    - (rho_old - tau div(Phi))
    with Lambda(rho) = U'(rho) - V'(rho_old) - gamma Lap rho.  The Jacobian
    is assembled from cached sparse difference matrices; the matrix-free
    apply goes through the stencil code so the two forms cross-check each
    other.
    """

    def __init__(self, state: State, phi: VectorField, model: EnergyModel,
                 params: SchemeParams):
        self.grid = state.grid
        self.model = model
        self.params = params
        self.rho_old = state.rho.values
        self.dV_old = model.dV(self.rho_old)
        self.stiff = (params.tau / params.mach) ** 2
        h = self.grid.h
        div_phi = _div_centered_array(
            tuple(c for c in phi.components), ANTISYMMETRIC, h)
        self.rhs = self.rho_old - params.tau * div_phi
        # per-step constant matrices: weighted div(rho_old grad .) and its
        # composition with the symmetric Laplacian
        grad_mats = sparse_gradient(self.grid, SYMMETRIC)
        div_mats = sparse_divergence(self.grid, ANTISYMMETRIC)
        rho_diag = sp.diags(self.rho_old.ravel())
        A0 = None
        for D, G in zip(div_mats, grad_mats):
            term = (D @ rho_diag @ G).tocsr()
            A0 = term if A0 is None else A0 + term
        self.A0 = A0.tocsr()
        self.lap_sym = sparse_laplacian(self.grid, SYMMETRIC)
        self.A0_lap = (self.A0 @ self.lap_sym).tocsr()
        self.eye = sp.identity(self.grid.n_nodes, format="csr")

    def chemical_potential(self, rho: np.ndarray) -> np.ndarray:
        m = self.model
        return (m.dU(rho) - self.dV_old
                - m.gamma * _laplacian_array(rho, SYMMETRIC, self.grid.h))

    def weighted_div_grad(self, field: np.ndarray) -> np.ndarray:
        """div(rho_old * grad field): symmetric gradient, antisymmetric flux."""
        grad = _grad_centered_array(field, SYMMETRIC, self.grid.h)
        flux = tuple(self.rho_old * g for g in grad)
        return _div_centered_array(flux, ANTISYMMETRIC, self.grid.h)

    def residual(self, rho: ScalarField) -> ScalarField:
        lam = self.chemical_potential(rho.values)
        out = rho.values - self.stiff * self.weighted_div_grad(lam) - self.rhs
        return ScalarField(self.grid, out)

    def jacobian(self, rho: ScalarField) -> SparseOperator:
        d2U = self.model.d2U(rho.values)
        gamma = self.model.gamma
        matrix = (self.eye
                  - self.stiff * (self.A0 @ sp.diags(d2U.ravel()))
                  + self.stiff * gamma * self.A0_lap).tocsr()

        def apply(delta: ScalarField) -> ScalarField:
            inner = d2U * delta.values - gamma * _laplacian_array(
                delta.values, SYMMETRIC, self.grid.h)
            out = delta.values - self.stiff * self.weighted_div_grad(inner)
            return ScalarField(self.grid, out)

        return SparseOperator(apply=apply, matrix=matrix, grid=self.grid)

    def linearized_operator(self) -> tuple:
        """Affine system (A, b) of the tangent variant; A is the Jacobian at
        rho_old and b collects the known parts of the linearized potential."""
        d2U_old = self.model.d2U(self.rho_old)
        known = (self.model.dU(self.rho_old) - d2U_old * self.rho_old
                 - self.dV_old)
        b = self.rhs + self.stiff * self.weighted_div_grad(known)
        A = self.jacobian(ScalarField(self.grid, self.rho_old))
        return A, ScalarField(self.grid, b)


def _check_positivity(rho: np.ndarray, grid: GridSpec):
    lowest = float(np.min(rho))
    if lowest <= 0.0:
        idx = np.unravel_index(int(np.argmin(rho)), grid.shape)
        raise PositivityError(idx, lowest)


def _check_mass_shell(rho_new: np.ndarray, rho_old: np.ndarray,
                      tol_residual: float):
    total_old = float(np.sum(rho_old))
    drift = abs(float(np.sum(rho_new)) - total_old)
    bound = max(tol_residual * rho_old.size, 1e-9 * abs(total_old))
    if drift > bound:
        raise SolverError(
            f"density solve left the mass shell: drift {drift:.3e} > {bound:.3e}")


def implicit_density_step(state: State, phi: VectorField, model: EnergyModel,
                          params: SchemeParams,
                          solver_cfg: Optional[NewtonConfig] = None):
    """Newton solve of the eliminated system; returns (rho_new, lam_new, result)."""
    cfg = solver_cfg or NewtonConfig()
    system = ImplicitDensitySystem(state, phi, model, params)
    result = newton_solve(system.residual, system.jacobian, state.rho, cfg)
    rho_new = result.solution
    _check_positivity(rho_new.values, state.grid)
    _check_mass_shell(rho_new.values, state.rho.values, cfg.tol_residual)
    lam_new = ScalarField(state.grid, system.chemical_potential(rho_new.values))
    return rho_new, lam_new, result


def linearized_density_step(state: State, phi: VectorField, model: EnergyModel,
                            params: SchemeParams,
                            solver_cfg: Optional[NewtonConfig] = None):
    """Tangent variant: exactly one linear solve per step."""
    cfg = solver_cfg or NewtonConfig()
    system = ImplicitDensitySystem(state, phi, model, params)
    A, b = system.linearized_operator()
    rho_new = linear_solve(A, b, cfg.linear_tol,
                           cfg.resolve_linear_method(state.grid.dim))
    residual = float(np.max(np.abs(
        (A.matrix @ rho_new.values.ravel()) - b.values.ravel())))
    _check_positivity(rho_new.values, state.grid)
    _check_mass_shell(rho_new.values, state.rho.values, cfg.tol_residual)
    d2U_old = model.d2U(state.rho.values)
    lam = (model.dU(state.rho.values)
           + d2U_old * (rho_new.values - state.rho.values)
           - model.dV(state.rho.values)
           - model.gamma * _laplacian_array(rho_new.values, SYMMETRIC, state.grid.h))
    result = NewtonResult(rho_new, 0, residual, [residual])
    return rho_new, ScalarField(state.grid, lam), result


def velocity_update(state: State, rho_new: ScalarField, lam_new: ScalarField,
                    phi: VectorField, params: SchemeParams) -> VectorField:
    """v_new = (Phi - rho_old (tau/M^2) grad Lambda_new) / rho_new.

    Only the gradient of Lambda enters, so any constant shift of the
    chemical potential leaves the velocity unchanged.
    """
    _check_positivity(rho_new.values, state.grid)
    grad_lam = _grad_centered_array(lam_new.values, SYMMETRIC, state.grid.h)
    scale = params.tau / params.mach**2
    comps = tuple(
        (pc - state.rho.values * scale * gc) / rho_new.values
        for pc, gc in zip(phi.components, grad_lam)
    )
    return VectorField(state.grid, comps)


def _monitor(policy: str, message: str, exc_type=CflViolationError):
    if policy == MONITOR_WARN:
        log.warning(message)
    elif policy == MONITOR_ABORT:
        raise exc_type(message)


def advance(state: State, params: SchemeParams, model: EnergyModel,
            solver_cfg: Optional[NewtonConfig] = None):
    """Advance one timestep; returns (new_state, StepDiagnostics).

    ``newton_iters`` in the diagnostics counts Newton iterations and is 0
    for the linearized variant (which does a single linear solve).
    """
    if not math.isclose(params.gamma, model.gamma, rel_tol=1e-12):
        raise ValueError(
            f"capillarity mismatch: params.gamma={params.gamma} "
            f"vs model.gamma={model.gamma}")
    bound = cfl_bound(state)
    ratio = 0.0 if math.isinf(bound) else params.tau / bound
    if ratio >= 1.0 and params.cfl_monitor != MONITOR_OFF:
        _monitor(params.cfl_monitor,
                 f"step {state.n}: tau={params.tau:.3e} exceeds the advective "
                 f"bound {bound:.3e}")
    mu_h = artificial_viscosity(state, params)
    phi = explicit_flux(state, params, mu_h)
    if params.variant == VARIANT_NEWTON:
        rho_new, lam_new, result = implicit_density_step(
            state, phi, model, params, solver_cfg)
    else:
        rho_new, lam_new, result = linearized_density_step(
            state, phi, model, params, solver_cfg)
    v_new = velocity_update(state, rho_new, lam_new, phi, params)
    new_state = State(rho=rho_new, v=v_new, lam=lam_new,
                      t=state.t + params.tau, n=state.n + 1)
    if params.range_monitor != MONITOR_OFF:
        lo, hi = model.admissible_range
        rmin = float(np.min(rho_new.values))
        rmax = float(np.max(rho_new.values))
        if rmin < lo or rmax > hi:
            _monitor(params.range_monitor,
                     f"step {new_state.n}: density range [{rmin:.4g}, {rmax:.4g}] "
                     f"leaves the admissible [{lo}, {hi}]", SolverError)
    post_bound = cfl_bound_posteriori(state, new_state)
    post_ratio = math.inf if post_bound == 0.0 and state.v.max_norm() > 0.0 else (
        params.tau / post_bound if post_bound > 0.0 else 0.0)
    diag = StepDiagnostics(
        t=new_state.t,
        mass=mass(rho_new),
        total_energy=total_energy(new_state, model, params.mach),
        kinetic_energy=kinetic_energy(new_state),
        newton_iters=result.iterations,
        max_residual=result.final_residual,
        cfl_ratio=ratio,
        min_density=float(np.min(rho_new.values)),
        cfl_post_ratio=post_ratio,
    )
    return new_state, diag


def scheme_residuals(old: State, new: State, model: EnergyModel,
                     params: SchemeParams, mu_h: float) -> dict:
    """Infinity norms of the three scheme equations across one step.

    Uses the stored chemical potential of ``new``; the potential equation is
    evaluated in the form matching ``params.variant``.
    """
    grid = old.grid
    h = grid.h
    tau = params.tau
    momentum_new = tuple(new.rho.values * c for c in new.v.components)
    r_mass = (new.rho.values - old.rho.values
              + tau * _div_centered_array(momentum_new, ANTISYMMETRIC, h))
    adv = div_advection(old.rho, old.v)
    lap_v = laplacian5_components(old.v, ANTISYMMETRIC)
    grad_lam = _grad_centered_array(new.lam.values, SYMMETRIC, h)
    scale = tau / params.mach**2
    r_momentum = 0.0
    for mn, vo, ac, lc, gc in zip(momentum_new, old.v.components,
                                  adv.components, lap_v.components, grad_lam):
        r = (mn - old.rho.values * vo + tau * ac
             + old.rho.values * scale * gc - mu_h * tau * lc)
        r_momentum = max(r_momentum, float(np.max(np.abs(r))))
    if params.variant == VARIANT_NEWTON:
        pot = model.dU(new.rho.values)
    else:
        pot = (model.dU(old.rho.values)
               + model.d2U(old.rho.values) * (new.rho.values - old.rho.values))
    r_lambda = (new.lam.values - pot + model.dV(old.rho.values)
                + model.gamma * _laplacian_array(new.rho.values, SYMMETRIC, h))
    return {
        "mass": float(np.max(np.abs(r_mass))),
        "momentum": r_momentum,
        "chemical_potential": float(np.max(np.abs(r_lambda))),
    }
