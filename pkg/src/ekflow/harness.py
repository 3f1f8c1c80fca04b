"""Configuration-driven runs, convergence studies, and file output.

A run resolves a :class:`RunConfig` (a preset name plus overrides, or an
explicit grid/model/initial/params bundle), advances the state for the
requested number of steps, and writes three artifacts into the output
directory:

``timeseries.csv``   one row per step: t, mass, total_energy,
                     normalized_energy, kinetic_energy, newton_iters,
                     max_residual, min_density, cfl_ratio
``snap_<n>.csv``     field snapshots (node coordinates, rho, u[, w], lambda)
``manifest.json``    the fully resolved configuration (every default made
                     explicit), code version, wall clock, a diagnostic
                     summary, and the termination status

The resolved configuration stored in the manifest can be fed back through
:func:`config_from_manifest` to rerun bit-for-bit.  Total energy is
normalized by its value at step 0; a run whose initial energy is exactly
zero reports the raw energy in the normalized column instead.

Solver failures do not raise out of :func:`run`: the manifest records the
failure and partial outputs are kept; the CLI turns that into exit code 2.
"""

from __future__ import annotations

import csv
import json
import logging
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .diagnostics import eoc, kinetic_energy, l2_error, mass, total_energy
from .grid import GridSpec, ScalarField, VectorField
from .model import EnergyModel, InitialData
from .presets import PRESET_NAMES, Preset, preset
from .solver import NewtonConfig, SolverError
from .stepper import SchemeParams, State, advance

log = logging.getLogger(__name__)

CONFIG_SCHEMA = 1
TIMESERIES_COLUMNS = (
    "t", "mass", "total_energy", "normalized_energy", "kinetic_energy",
    "newton_iters", "max_residual", "min_density", "cfl_ratio",
)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExplicitSetup:
    """Library-level alternative to a preset name."""

    grid: GridSpec
    model: EnergyModel
    initial: InitialData
    params: SchemeParams
    solver: NewtonConfig = field(default_factory=NewtonConfig)


@dataclass(frozen=True)
class RunConfig:
    """One run: a preset (with overrides) or an explicit setup.

    ``snapshot_every`` of 0 dumps fields only at step 0 and the final step.
    ``seed`` only affects randomized verification, never the physics.
    """

    preset: Optional[str] = None
    explicit: Optional[ExplicitSetup] = None
    K: Optional[int] = None
    mach: Optional[float] = None
    amplitude_mach: Optional[float] = None
    variant: Optional[str] = None
    steps: Optional[int] = None
    tfinal: Optional[float] = None
    out_dir: Optional[str] = None
    snapshot_every: int = 0
    tol_residual: Optional[float] = None
    tol_step: Optional[float] = None
    max_iter: Optional[int] = None
    linear_tol: Optional[float] = None
    linear_method: Optional[str] = None
    mu_policy: Optional[str] = None
    mu_value: Optional[float] = None
    cfl_monitor: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if (self.preset is None) == (self.explicit is None):
            raise ConfigError("exactly one of preset/explicit must be given")
        if self.preset is not None and self.preset not in PRESET_NAMES:
            raise ConfigError(
                f"unknown preset {self.preset!r}; choose from {PRESET_NAMES}")
        if self.snapshot_every < 0:
            raise ConfigError("snapshot_every must be nonnegative")
        if self.steps is not None and self.tfinal is not None:
            raise ConfigError("give either steps or tfinal, not both")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be positive")


@dataclass(frozen=True)
class ResolvedRun:
    """Everything needed to execute a run, with all defaults applied."""

    grid: GridSpec
    model: EnergyModel
    initial: InitialData
    params: SchemeParams
    solver: NewtonConfig
    steps: int
    snapshot_every: int
    seed: int
    preset_name: Optional[str]

    def config_dict(self) -> dict:
        """JSON-serializable resolved configuration (manifest schema)."""
        return {
            "schema": CONFIG_SCHEMA,
            "preset": self.preset_name,
            "K": self.grid.K,
            "dim": self.grid.dim,
            "domain": [self.grid.lo, self.grid.hi],
            "mach": self.params.mach,
            "gamma": self.params.gamma,
            "tau": self.params.tau,
            "mu_policy": self.params.mu_policy,
            "mu_value": self.params.mu_value,
            "cfl_monitor": self.params.cfl_monitor,
            "range_monitor": self.params.range_monitor,
            "variant": self.params.variant,
            "steps": self.steps,
            "snapshot_every": self.snapshot_every,
            "solver": {
                "tol_residual": self.solver.tol_residual,
                "tol_step": self.solver.tol_step,
                "max_iter": self.solver.max_iter,
                "linear_tol": self.solver.linear_tol,
                "line_search": self.solver.line_search,
                "max_halvings": self.solver.max_halvings,
                "linear_method": self.solver.linear_method,
            },
            "seed": self.seed,
        }


def resolve(config: RunConfig) -> ResolvedRun:
    """Apply preset defaults and overrides; validate the combination."""
    if config.explicit is not None:
        ex = config.explicit
        base = Preset(name="explicit", grid=ex.grid, model=ex.model,
                      initial=ex.initial, params=ex.params, solver=ex.solver,
                      default_steps=config.steps or 1)
        name = None
    else:
        try:
            base = preset(config.preset, K=config.K, M=config.mach,
                          amplitude_mach=config.amplitude_mach)
        except ValueError as exc:
            raise ConfigError(str(exc))
        name = config.preset
    params = base.params
    solver = base.solver
    if config.variant is not None:
        params = replace(params, variant=config.variant)
    if config.mu_policy is not None:
        params = replace(params, mu_policy=config.mu_policy)
    if config.mu_value is not None:
        params = replace(params, mu_value=config.mu_value)
    if config.cfl_monitor is not None:
        params = replace(params, cfl_monitor=config.cfl_monitor)
    overrides = {}
    for name_ in ("tol_residual", "tol_step", "max_iter", "linear_tol",
                  "linear_method"):
        value = getattr(config, name_)
        if value is not None:
            overrides[name_] = value
    if overrides:
        solver = replace(solver, **overrides)
    if config.steps is not None:
        steps = config.steps
    elif config.tfinal is not None:
        steps = int(round(config.tfinal / params.tau))
        if steps < 1:
            raise ConfigError(
                f"tfinal {config.tfinal} is below one timestep {params.tau}")
    else:
        steps = base.default_steps
    try:
        params.__post_init__()  # revalidate after overrides
    except ValueError as exc:
        raise ConfigError(str(exc))
    return ResolvedRun(grid=base.grid, model=base.model, initial=base.initial,
                       params=params, solver=solver, steps=steps,
                       snapshot_every=config.snapshot_every, seed=config.seed,
                       preset_name=name)


def _format(x) -> str:
    """Shortest round-trip decimal form ('.' separator, full precision)."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_format(x) for x in row])


def _snapshot_rows(state: State):
    grid = state.grid
    lam = state.lam.values if state.lam is not None else np.zeros(grid.shape)
    if grid.dim == 1:
        x = grid.coords()
        (u,) = state.v.components
        for i in range(grid.K + 1):
            yield (x[i], state.rho.values[i], u[i], lam[i])
    else:
        x, y = grid.meshgrid()
        u, w = state.v.components
        for i in range(grid.K + 1):
            for j in range(grid.K + 1):
                yield (x[i, j], y[i, j], state.rho.values[i, j],
                       u[i, j], w[i, j], lam[i, j])


def _write_snapshot(out: Path, state: State):
    header = (("x", "rho", "u", "lambda") if state.grid.dim == 1
              else ("x", "y", "rho", "u", "w", "lambda"))
    _write_csv(out / f"snap_{state.n:06d}.csv", header, _snapshot_rows(state))


@dataclass
class RunManifest:
    config: dict
    code_version: str
    status: str
    exit_code: int
    wall_clock_seconds: float
    steps_completed: int
    summary: dict
    error: Optional[str] = None

    def write(self, path: Path):
        with open(path, "w") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


def run(config: RunConfig) -> RunManifest:
    """Execute a run and write timeseries/snapshots/manifest to out_dir."""
    resolved = resolve(config)
    if config.out_dir is None:
        raise ConfigError("run() needs an output directory")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = State(rho=resolved.initial.rho, v=resolved.initial.v)
    initial_energy = total_energy(state, resolved.model, resolved.params.mach)

    def normalized(e: float) -> float:
        return e / initial_energy if initial_energy != 0.0 else e

    rows = [(0.0, mass(state.rho), initial_energy, normalized(initial_energy),
             kinetic_energy(state), 0, 0.0, float(np.min(state.rho.values)),
             0.0)]
    stride = resolved.snapshot_every
    _write_snapshot(out, state)
    status, error_text = "completed", None
    started = time.perf_counter()
    mass0 = rows[0][1]
    max_iters = 0
    min_density = rows[0][7]
    max_mass_drift = 0.0
    try:
        for _ in range(resolved.steps):
            state, diag = advance(state, resolved.params, resolved.model,
                                  resolved.solver)
            rows.append((diag.t, diag.mass, diag.total_energy,
                         normalized(diag.total_energy), diag.kinetic_energy,
                         diag.newton_iters, diag.max_residual,
                         diag.min_density, diag.cfl_ratio))
            max_iters = max(max_iters, diag.newton_iters)
            min_density = min(min_density, diag.min_density)
            max_mass_drift = max(max_mass_drift, abs(diag.mass - mass0))
            if stride and state.n % stride == 0 and state.n != resolved.steps:
                _write_snapshot(out, state)
    except SolverError as exc:
        status, error_text = "solver_failure", f"{type(exc).__name__}: {exc}"
        log.error("run aborted at step %d: %s", state.n, error_text)
    wall = time.perf_counter() - started
    _write_snapshot(out, state)
    _write_csv(out / "timeseries.csv", TIMESERIES_COLUMNS, rows)
    summary = {
        "initial_energy": rows[0][2],
        "final_energy": rows[-1][2],
        "initial_mass": mass0,
        "final_mass": rows[-1][1],
        "max_abs_mass_drift": max_mass_drift,
        "min_density": min_density,
        "max_newton_iters": max_iters,
        "final_time": rows[-1][0],
    }
    manifest = RunManifest(
        config=resolved.config_dict(),
        code_version=__version__,
        status=status,
        exit_code=0 if status == "completed" else 2,
        wall_clock_seconds=wall,
        steps_completed=state.n,
        summary=summary,
        error=error_text,
    )
    manifest.write(out / "manifest.json")
    return manifest


def load_config(path) -> RunConfig:
    """Read a RunConfig from a versioned JSON file."""
    with open(path) as fh:
        raw = json.load(fh)
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> RunConfig:
    if raw.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(
            f"unsupported config schema {raw.get('schema')!r}; expected {CONFIG_SCHEMA}")
    if raw.get("preset") is None:
        raise ConfigError(
            "configuration does not reference a preset; explicit library "
            "setups must be reconstructed in code")
    solver = raw.get("solver", {})
    return RunConfig(
        preset=raw.get("preset"),
        K=raw.get("K"),
        mach=raw.get("mach"),
        amplitude_mach=raw.get("amplitude_mach"),
        variant=raw.get("variant"),
        steps=raw.get("steps"),
        tfinal=raw.get("tfinal"),
        out_dir=raw.get("out_dir"),
        snapshot_every=raw.get("snapshot_every", 0),
        tol_residual=solver.get("tol_residual"),
        tol_step=solver.get("tol_step"),
        max_iter=solver.get("max_iter"),
        linear_tol=solver.get("linear_tol"),
        linear_method=solver.get("linear_method"),
        mu_policy=raw.get("mu_policy"),
        mu_value=raw.get("mu_value"),
        cfl_monitor=raw.get("cfl_monitor"),
        seed=raw.get("seed", 0),
    )


def config_from_manifest(path, out_dir=None) -> RunConfig:
    """Rebuild the RunConfig stored in a manifest (bit-for-bit rerunnable)."""
    with open(path) as fh:
        manifest = json.load(fh)
    raw = dict(manifest["config"])
    if out_dir is not None:
        raw["out_dir"] = str(out_dir)
    return config_from_dict(raw)


# ---------------------------------------------------------------------------
# convergence studies
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EocRow:
    K: int
    err_rho: float
    eoc_rho: Optional[float]
    err_v: Optional[float]
    eoc_v: Optional[float]


def _final_state(config: RunConfig) -> State:
    resolved = resolve(config)
    state = State(rho=resolved.initial.rho, v=resolved.initial.v)
    for _ in range(resolved.steps):
        state, _ = advance(state, resolved.params, resolved.model,
                           resolved.solver)
    return state


def eoc_study(base_config: RunConfig, K_list, reference: Optional[str] = None,
              K_ref: Optional[int] = None, out_dir=None) -> list:
    """Errors and convergence orders over a doubling resolution sequence.

    ``reference`` is 'exact' (compare the density against the preset's exact
    profile; velocity errors are absolute against zero) or 'finest' (compare
    both fields, relatively, against a run at ``K_ref``, default 4x the
    largest K).  All runs measure at the same final time, taken from the
    preset.  Writes ``eoc.csv`` into ``out_dir`` when given.
    """
    K_list = list(K_list)
    if len(K_list) < 2:
        raise ConfigError("an EOC study needs at least two resolutions")
    for a, b in zip(K_list[:-1], K_list[1:]):
        if b != 2 * a:
            raise ConfigError(f"resolutions must double: got {a} -> {b}")
    if base_config.preset is None:
        raise ConfigError("eoc_study needs a preset-based configuration")
    base = preset(base_config.preset, K=K_list[0], M=base_config.mach,
                  amplitude_mach=base_config.amplitude_mach)
    if base.measure_time is None:
        raise ConfigError(
            f"preset {base.name} does not define a measurement time")
    mode = base.error_mode or "relative"
    reference = reference or base.reference or "finest"
    if reference not in ("exact", "finest"):
        raise ConfigError(f"unknown reference kind {reference!r}")
    if reference == "exact" and base.exact_rho is None:
        raise ConfigError(f"preset {base.name} has no exact profile")

    def state_at(K: int) -> State:
        cfg = replace(base_config, K=K, steps=None, tfinal=base.measure_time,
                      out_dir=None)
        return _final_state(cfg)

    ref_state = None
    if reference == "finest":
        K_ref = K_ref or 4 * max(K_list)
        if any(K_ref % K for K in K_list):
            raise ConfigError(
                f"reference K={K_ref} must be a multiple of every studied K")
        log.info("computing finest-grid reference at K=%d", K_ref)
        ref_state = state_at(K_ref)

    errs_rho, errs_v = [], []
    for K in K_list:
        state = state_at(K)
        if reference == "exact":
            exact = ScalarField.from_function(state.grid, base.exact_rho)
            err_rho = l2_error(state.rho, exact, mode)
            err_v = l2_error(state.v, VectorField.zero(state.grid), "absolute")
        else:
            err_rho = l2_error(state.rho, ref_state.rho, mode)
            err_v = l2_error(state.v, ref_state.v, mode)
        errs_rho.append((K, err_rho))
        errs_v.append((K, err_v))
        log.info("K=%d err_rho=%.4e err_v=%.4e", K, err_rho, err_v)

    orders_rho = eoc(errs_rho)
    try:
        orders_v = eoc(errs_v)
    except ValueError:
        orders_v = [None] * (len(K_list) - 1)
    rows = []
    for idx, (K, err_rho) in enumerate(errs_rho):
        rows.append(EocRow(
            K=K, err_rho=err_rho,
            eoc_rho=None if idx == 0 else orders_rho[idx - 1],
            err_v=errs_v[idx][1],
            eoc_v=None if idx == 0 else orders_v[idx - 1]))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table = [(r.K, r.err_rho, "" if r.eoc_rho is None else r.eoc_rho,
                  r.err_v, "" if r.eoc_v is None else r.eoc_v) for r in rows]
        with open(out / "eoc.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(("K", "err_rho", "eoc_rho", "err_v", "eoc_v"))
            for row in table:
                writer.writerow([x if isinstance(x, str) else _format(x)
                                 for x in row])
    return rows
