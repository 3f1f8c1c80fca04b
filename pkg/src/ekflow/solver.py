"""Nonlinear and linear solvers for the implicit density update.

:func:`newton_solve` is a damped Newton iteration over scalar fields with an
analytic Jacobian supplied as a :class:`SparseOperator` (matrix-free apply
plus an assembled sparse matrix).  :func:`dense_oracle_solve` solves the
same root problem with a dense finite-difference Jacobian and dense linear
algebra; it exists purely to cross-validate the production path on small
grids and guards against being run on anything larger.

The assembled Jacobian is nonsymmetric in general (variable coefficient
inside div(rho grad .) composed with the fourth-order capillarity term), so
the linear solves use sparse LU or, optionally, ILU-preconditioned GMRES.
Both back ends must meet the same residual contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import NonFiniteFieldError, ScalarField

DENSE_ORACLE_MAX_NODES = 512


class SolverError(RuntimeError):
    """Base class for solver failures."""


class LinearSolveError(SolverError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (attained relative residual {residual:.3e})")
        self.residual = residual


class NewtonDivergenceError(SolverError):
    def __init__(self, message: str, last_iterate: ScalarField,
                 residual_history: list):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual_history = residual_history


class NumericalBlowupError(SolverError):
    pass


@dataclass(frozen=True)
class NewtonConfig:
    """Tolerances and policies for the damped Newton iteration.

    ``tol_residual`` bounds the infinity norm of the residual at the
    accepted solution; ``tol_step`` is a stagnation guard on the update.
    ``linear_method`` picks the linear back end: 'direct' (sparse LU),
    'iterative' (ILU-preconditioned GMRES) or 'auto' (direct in 1D,
    iterative in 2D).
    """

    tol_residual: float = 1e-7
    tol_step: float = 1e-12
    max_iter: int = 50
    linear_tol: float = 1e-10
    line_search: bool = True
    max_halvings: int = 20
    linear_method: str = "auto"

    def __post_init__(self):
        if min(self.tol_residual, self.tol_step, self.linear_tol) <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.linear_method not in ("auto", "direct", "iterative"):
            raise ValueError(f"unknown linear_method {self.linear_method!r}")

    def resolve_linear_method(self, dim: int) -> str:
        if self.linear_method != "auto":
            return self.linear_method
        return "direct" if dim == 1 else "iterative"


@dataclass(frozen=True)
class SparseOperator:
    """A linear operator as matrix-free apply plus assembled sparse form."""

    apply: Callable  # ScalarField -> ScalarField
    matrix: sp.spmatrix
    grid: "object" = None

    @property
    def shape(self):
        return self.matrix.shape


@dataclass
class NewtonResult:
    solution: ScalarField
    iterations: int
    final_residual: float
    residual_history: list = field(default_factory=list)


def linear_solve(A: SparseOperator, b: ScalarField, tol: float,
                 method: str = "direct") -> ScalarField:
    """Solve A x = b to relative 2-norm residual ``tol``.

    Raises :class:`LinearSolveError` with the attained residual when the
    contract cannot be met.
    """
    rhs = b.values.ravel()
    norm_b = float(np.linalg.norm(rhs))
    if norm_b == 0.0:
        return ScalarField(b.grid, np.zeros(b.grid.shape))
    matrix = A.matrix.tocsc()
    if method == "direct":
        x = spla.splu(matrix).solve(rhs)
    elif method == "iterative":
        try:
            precond = spla.spilu(matrix, drop_tol=1e-8, fill_factor=20.0)
        except RuntimeError as exc:  # singular pivot during ILU
            raise LinearSolveError(f"ILU factorization failed: {exc}", np.inf)
        M = spla.LinearOperator(matrix.shape, precond.solve)
        x, info = spla.gmres(matrix, rhs, rtol=0.1 * tol, atol=0.0,
                             restart=50, maxiter=400, M=M)
        if info != 0:
            res = float(np.linalg.norm(matrix @ x - rhs)) / norm_b
            raise LinearSolveError("GMRES did not converge", res)
    else:
        raise ValueError(f"unknown linear method {method!r}")
    res = float(np.linalg.norm(matrix @ x - rhs)) / norm_b
    if not np.isfinite(res) or res > tol:
        raise LinearSolveError("linear solve missed its tolerance", res)
    return ScalarField(b.grid, x.reshape(b.grid.shape))


def _inf_norm(values: np.ndarray) -> float:
    return float(np.max(np.abs(values)))


def _evaluate(residual: Callable, x: ScalarField) -> ScalarField:
    """Evaluate the residual, mapping overflow to a blow-up error."""
    try:
        return residual(x)
    except NonFiniteFieldError:
        raise NumericalBlowupError(
            "residual evaluation produced non-finite values")


def newton_solve(residual: Callable, jacobian: Callable, guess: ScalarField,
                 cfg: Optional[NewtonConfig] = None) -> NewtonResult:
    """Damped Newton iteration for residual(x) = 0.

    ``residual`` maps a scalar field to a scalar field; ``jacobian`` maps the
    current iterate to the :class:`SparseOperator` derivative of the
    residual.  The optional line search halves the step until the residual
    norm decreases (at most ``max_halvings`` times, then takes the best
    candidate seen).
    """
    cfg = cfg or NewtonConfig()
    method = cfg.resolve_linear_method(guess.grid.dim)
    x = guess
    r = _evaluate(residual, x)
    rnorm = _inf_norm(r.values)
    history = [rnorm]
    for it in range(1, cfg.max_iter + 1):
        if not np.isfinite(rnorm):
            raise NumericalBlowupError("residual is not finite")
        if rnorm <= cfg.tol_residual:
            return NewtonResult(x, it - 1, rnorm, history)
        J = jacobian(x)
        neg_r = ScalarField(x.grid, -r.values)
        step = linear_solve(J, neg_r, cfg.linear_tol, method)
        scale = 1.0
        x_new = ScalarField(x.grid, x.values + step.values)
        r_new = _evaluate(residual, x_new)
        rnorm_new = _inf_norm(r_new.values)
        if cfg.line_search:
            best = (rnorm_new, x_new, r_new, scale)
            halvings = 0
            while (not np.isfinite(rnorm_new) or rnorm_new >= rnorm) and halvings < cfg.max_halvings:
                scale *= 0.5
                halvings += 1
                x_new = ScalarField(x.grid, x.values + scale * step.values)
                r_new = _evaluate(residual, x_new)
                rnorm_new = _inf_norm(r_new.values)
                if np.isfinite(rnorm_new) and rnorm_new < best[0]:
                    best = (rnorm_new, x_new, r_new, scale)
            rnorm_new, x_new, r_new, scale = best
        if scale * _inf_norm(step.values) <= cfg.tol_step:
            # update stagnated; accept only if the residual target is met
            history.append(rnorm_new)
            if rnorm_new <= cfg.tol_residual:
                return NewtonResult(x_new, it, rnorm_new, history)
            raise NewtonDivergenceError(
                f"Newton stagnated at residual {rnorm_new:.3e} after {it} iterations",
                x_new, history)
        x, r, rnorm = x_new, r_new, rnorm_new
        history.append(rnorm)
    if rnorm <= cfg.tol_residual:
        return NewtonResult(x, cfg.max_iter, rnorm, history)
    raise NewtonDivergenceError(
        f"Newton did not converge in {cfg.max_iter} iterations "
        f"(residual {rnorm:.3e})", x, history)


def dense_oracle_solve(residual: Callable, guess: ScalarField,
                       cfg: Optional[NewtonConfig] = None,
                       fd_eps: float = 1e-7) -> NewtonResult:
    """Newton with a dense central-difference Jacobian; test-scale only.

    Independent of the analytic-Jacobian path: the Jacobian is rebuilt
    column by column from residual evaluations and the updates use dense LU.
    """
    cfg = cfg or NewtonConfig()
    grid = guess.grid
    n = grid.n_nodes
    if n > DENSE_ORACLE_MAX_NODES:
        raise ValueError(
            f"dense oracle limited to {DENSE_ORACLE_MAX_NODES} nodes, got {n}")

    def res_flat(vec: np.ndarray) -> np.ndarray:
        f = _evaluate(residual, ScalarField(grid, vec.reshape(grid.shape)))
        return f.values.ravel()

    x = guess.values.ravel().copy()
    r = res_flat(x)
    rnorm = _inf_norm(r)
    history = [rnorm]
    for it in range(1, cfg.max_iter + 1):
        if not np.isfinite(rnorm):
            raise NumericalBlowupError("residual is not finite")
        if rnorm <= cfg.tol_residual:
            return NewtonResult(ScalarField(grid, x.reshape(grid.shape)),
                                it - 1, rnorm, history)
        J = np.empty((n, n))
        for k in range(n):
            eps = fd_eps * max(1.0, abs(x[k]))
            xp = x.copy()
            xm = x.copy()
            xp[k] += eps
            xm[k] -= eps
            J[:, k] = (res_flat(xp) - res_flat(xm)) / (2.0 * eps)
        step = np.linalg.solve(J, -r)
        if _inf_norm(step) <= cfg.tol_step:
            raise NewtonDivergenceError(
                f"dense oracle stagnated at residual {rnorm:.3e}",
                ScalarField(grid, x.reshape(grid.shape)), history)
        x = x + step
        r = res_flat(x)
        rnorm = _inf_norm(r)
        history.append(rnorm)
    if rnorm <= cfg.tol_residual:
        return NewtonResult(ScalarField(grid, x.reshape(grid.shape)),
                            cfg.max_iter, rnorm, history)
    raise NewtonDivergenceError(
        f"dense oracle did not converge in {cfg.max_iter} iterations",
        ScalarField(grid, x.reshape(grid.shape)), history)
