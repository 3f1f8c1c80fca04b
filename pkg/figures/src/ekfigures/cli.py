"""Command line: ``figures <kind> --in <dir...> --out <file>``."""

from __future__ import annotations

import argparse
import sys

from .io import MissingDataError
from .render import KINDS, FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render figures/tables from stored solver outputs")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        metavar="DIR_OR_FILE",
                        help="run directories (or the eoc.csv for eoc_table)")
    parser.add_argument("--out", required=True, metavar="FILE",
                        help="output image/table path")
    parser.add_argument("--snapshot", type=int, default=None, metavar="N",
                        help="snapshot step for profile/heatmap (default: last)")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    options = {}
    if args.snapshot is not None:
        options["snapshot"] = args.snapshot
    try:
        spec = FigureSpec(kind=args.kind, inputs=tuple(args.inputs),
                          output=args.out, options=options)
        render(spec)
    except (MissingDataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(args.out)
    return 0


def entry():  # console script
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
