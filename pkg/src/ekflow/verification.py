"""Randomized verification of the discrete operator identities.

These checks evaluate both sides of each identity directly on random
fields; they back the ``ekflow check`` subcommand and the acceptance tests.

* advection compatibility: the average-flux advection divergence paired
  with the velocity equals half the squared speed paired with the centered
  momentum divergence,
* inverse inequality: the forward-difference Jacobian energy is bounded by
  (8/h^2) times the nodal L2 norm,
* summation by parts, quadratic and cross form: pairing the ghost-extended
  5-point Laplacian against a field equals the complete forward-difference
  energy plus a weighted boundary sum (corner nodes count once per axis),
* telescoping: the centered divergence of an antisymmetrically extended
  field sums to zero over all nodes, which is what makes every timestep
  conserve mass.

Random draws follow the conventions of the scheme: densities in [0.5, 2],
velocity components in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ANTISYMMETRIC, GridSpec, ScalarField, VectorField
from .operators import (
    boundary_weighted_product,
    div_advection,
    div_centered,
    forward_difference_energy,
    jacobian_forward,
    neg_laplacian_pairing,
)

DEFAULT_KS = (4, 8, 16)
DEFAULT_DIMS = (1, 2)
IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    worst: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.bound

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"[{status}] {self.name}: worst {self.worst:.3e} "
                f"(bound {self.bound:.3e}, {self.cases} cases)")


def _random_fields(rng, grid: GridSpec):
    rho = ScalarField(grid, rng.uniform(0.5, 2.0, size=grid.shape))
    v = VectorField(grid, tuple(
        rng.uniform(-1.0, 1.0, size=grid.shape) for _ in range(grid.dim)))
    return rho, v


def _rel(lhs: float, rhs: float, scale: float = 0.0) -> float:
    """Discrepancy relative to the magnitude of the computation.

    Both sides of each identity are sums whose terms may nearly cancel, so
    the natural scale is the summand mass (passed as ``scale``), not the
    cancelled sum value.
    """
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), scale, 1e-300)


def _grids(Ks, dims):
    for dim in dims:
        for K in Ks:
            yield GridSpec(dim=dim, K=K)


def check_advection_compatibility(rng, Ks=DEFAULT_KS, dims=DEFAULT_DIMS,
                                  cases_per_grid=100) -> CheckResult:
    worst = 0.0
    total = 0
    for grid in _grids(Ks, dims):
        for _ in range(cases_per_grid):
            rho, v = _random_fields(rng, grid)
            lhs = 0.0
            mass = 0.0
            for a, c in zip(div_advection(rho, v).components, v.components):
                lhs += float(np.sum(a * c))
                mass += float(np.sum(np.abs(a * c)))
            momentum = VectorField(grid, tuple(rho.values * c for c in v.components))
            div_m = div_centered(momentum, ANTISYMMETRIC)
            rhs = 0.5 * float(np.sum(v.magnitude_sq() * div_m.values))
            worst = max(worst, _rel(lhs, rhs, mass))
            total += 1
    return CheckResult("advection compatibility", total, worst, IDENTITY_TOL)


def check_inverse_inequality(rng, Ks=DEFAULT_KS, dims=DEFAULT_DIMS,
                             cases_per_grid=100) -> CheckResult:
    """Worst ratio of Jacobian energy to (8/h^2) nodal norm; must stay <= 1."""
    worst = 0.0
    total = 0
    for grid in _grids(Ks, dims):
        for _ in range(cases_per_grid):
            _, v = _random_fields(rng, grid)
            lhs = jacobian_forward(v).frobenius_sq_sum()
            rhs = 8.0 / grid.h**2 * float(np.sum(v.magnitude_sq()))
            worst = max(worst, lhs / rhs)
            total += 1
    return CheckResult("inverse inequality", total, worst, 1.0)


def check_sbp_quadratic(rng, Ks=DEFAULT_KS, dims=DEFAULT_DIMS,
                        cases_per_grid=100) -> CheckResult:
    worst = 0.0
    total = 0
    for grid in _grids(Ks, dims):
        for _ in range(cases_per_grid):
            _, v = _random_fields(rng, grid)
            lhs = neg_laplacian_pairing(v, v)
            rhs = forward_difference_energy(v, v) + boundary_weighted_product(v, v)
            worst = max(worst, _rel(lhs, rhs))
            total += 1
    return CheckResult("summation by parts (quadratic)", total, worst, IDENTITY_TOL)


def check_sbp_cross(rng, Ks=DEFAULT_KS, dims=DEFAULT_DIMS,
                    cases_per_grid=100) -> CheckResult:
    worst = 0.0
    total = 0
    for grid in _grids(Ks, dims):
        for _ in range(cases_per_grid):
            _, v = _random_fields(rng, grid)
            _, w = _random_fields(rng, grid)
            lhs = neg_laplacian_pairing(v, w)
            mass = abs(forward_difference_energy(v, v)) + \
                abs(forward_difference_energy(w, w))
            rhs = forward_difference_energy(v, w) + boundary_weighted_product(v, w)
            worst = max(worst, _rel(lhs, rhs, mass))
            total += 1
    return CheckResult("summation by parts (cross)", total, worst, IDENTITY_TOL)


def check_mass_telescoping(rng, Ks=DEFAULT_KS, dims=DEFAULT_DIMS,
                           cases_per_grid=100) -> CheckResult:
    worst = 0.0
    total = 0
    for grid in _grids(Ks, dims):
        for _ in range(cases_per_grid):
            _, v = _random_fields(rng, grid)
            div = div_centered(v, ANTISYMMETRIC)
            scale = grid.n_nodes * v.max_norm() / grid.h
            worst = max(worst, abs(float(np.sum(div.values))) / scale)
            total += 1
    return CheckResult("divergence telescoping", total, worst, IDENTITY_TOL)


def run_all_checks(seed: int = 0, cases_per_grid: int = 100) -> list:
    rng = np.random.default_rng(seed)
    return [
        check_advection_compatibility(rng, cases_per_grid=cases_per_grid),
        check_inverse_inequality(rng, cases_per_grid=cases_per_grid),
        check_sbp_quadratic(rng, cases_per_grid=cases_per_grid),
        check_sbp_cross(rng, cases_per_grid=cases_per_grid),
        check_mass_telescoping(rng, cases_per_grid=cases_per_grid),
    ]
