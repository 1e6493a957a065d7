"""figures <kind> --in CSV --out PNG"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, FigureSpec, render
from .schema import SchemaError


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="figures",
        description="Render weakmeas CSV outputs as figures")
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("--in", dest="inputs", action="append", required=True,
                        metavar="CSV", help="input CSV (repeatable)")
    parser.add_argument("--out", required=True, metavar="PNG")
    parser.add_argument("--time-label", default="t")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        spec = FigureSpec(inputs=tuple(args.inputs), kind=args.kind,
                          out_path=args.out, time_label=args.time_label)
        path = render(spec)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
