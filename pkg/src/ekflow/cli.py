"""Command line interface: ``ekflow run|eoc|check``.

Exit codes: 0 on success, 1 on configuration errors, 2 on solver or
verification failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .harness import ConfigError, RunConfig, eoc_study, load_config, run
from .verification import run_all_checks


def _add_run_options(p: argparse.ArgumentParser):
    # SUPPRESS keeps a top-level -v from being overwritten by the default
    p.add_argument("-v", "--verbose", action="store_true",
                   default=argparse.SUPPRESS, help="info-level logging")
    p.add_argument("--preset", choices=("exp51", "exp52", "exp53", "exp54", "exp55"),
                   help="named experiment configuration")
    p.add_argument("--config", metavar="FILE",
                   help="JSON run configuration (overridden by other flags)")
    p.add_argument("--K", type=int, help="cells per direction")
    p.add_argument("--mach", type=float, help="Mach number override")
    p.add_argument("--amplitude-mach", type=float,
                   help="pin the exp52 datum amplitude 1/2 + 4M to this M")
    p.add_argument("--variant", choices=("newton", "linearized"),
                   help="implicit density update variant")
    p.add_argument("--steps", type=int, help="number of timesteps")
    p.add_argument("--tfinal", type=float, help="final time (instead of --steps)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--snapshot-every", type=int, default=None, metavar="N",
                   help="steps between field snapshots (default: endpoints only)")
    p.add_argument("--mu-policy", choices=("proportional", "fixed"))
    p.add_argument("--mu-value", type=float,
                   help="velocity floor (proportional) or viscosity (fixed)")
    p.add_argument("--tol-residual", type=float, help="nonlinear residual tolerance")
    p.add_argument("--linear-method", choices=("auto", "direct", "iterative"))
    p.add_argument("--cfl-monitor", choices=("off", "warn", "abort"))


def _config_from_args(args) -> RunConfig:
    if args.config:
        base = load_config(args.config)
    elif args.preset:
        base = RunConfig(preset=args.preset)
    else:
        raise ConfigError("either --preset or --config is required")
    overrides = {}
    mapping = {
        "preset": args.preset, "K": args.K, "mach": args.mach,
        "amplitude_mach": args.amplitude_mach, "variant": args.variant,
        "steps": args.steps, "tfinal": args.tfinal, "out_dir": args.out,
        "snapshot_every": args.snapshot_every, "mu_policy": args.mu_policy,
        "mu_value": args.mu_value, "tol_residual": args.tol_residual,
        "linear_method": args.linear_method, "cfl_monitor": args.cfl_monitor,
    }
    for key, value in mapping.items():
        if value is not None:
            overrides[key] = value
    return dataclasses.replace(base, **overrides)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ekflow",
        description="All-speed solver for the isothermal Euler-Korteweg system")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_run_options(p_run)

    p_eoc = sub.add_parser("eoc", help="run a convergence study")
    _add_run_options(p_eoc)
    p_eoc.add_argument("--K-list", default="40,80,160,320", metavar="K1,K2,...",
                       help="doubling resolution sequence (default 40,80,160,320)")
    p_eoc.add_argument("--reference", choices=("exact", "finest"),
                       help="error reference (preset default otherwise)")
    p_eoc.add_argument("--K-ref", type=int,
                       help="finest-grid reference resolution (default 4x max K)")

    p_check = sub.add_parser(
        "check", help="run the randomized operator identity suites")
    p_check.add_argument("-v", "--verbose", action="store_true",
                         default=argparse.SUPPRESS, help="info-level logging")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.add_argument("--cases", type=int, default=100,
                         help="random cases per grid per identity")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage problems; those are configuration errors
        return 0 if exc.code in (0, None) else 1
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")

    try:
        if args.command == "run":
            config = _config_from_args(args)
            if config.out_dir is None:
                raise ConfigError("--out is required")
            manifest = run(config)
            print(f"status: {manifest.status} "
                  f"({manifest.steps_completed} steps, "
                  f"{manifest.wall_clock_seconds:.2f}s)")
            if manifest.error:
                print(manifest.error, file=sys.stderr)
            return manifest.exit_code
        if args.command == "eoc":
            config = _config_from_args(args)
            try:
                K_list = [int(x) for x in args.K_list.split(",") if x]
            except ValueError:
                raise ConfigError(f"bad --K-list {args.K_list!r}")
            rows = eoc_study(config, K_list, reference=args.reference,
                             K_ref=args.K_ref, out_dir=config.out_dir)
            print(f"{'K':>6} {'err_rho':>12} {'eoc':>6} {'err_v':>12} {'eoc':>6}")
            for r in rows:
                eoc_rho = "--" if r.eoc_rho is None else f"{r.eoc_rho:.2f}"
                eoc_v = "--" if r.eoc_v is None else f"{r.eoc_v:.2f}"
                print(f"{r.K:>6} {r.err_rho:>12.4e} {eoc_rho:>6} "
                      f"{r.err_v:>12.4e} {eoc_v:>6}")
            return 0
        # check
        results = run_all_checks(seed=args.seed, cases_per_grid=args.cases)
        for result in results:
            print(result.line())
        return 0 if all(r.passed for r in results) else 2
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1


def entry():  # console script
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
