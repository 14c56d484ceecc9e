"""Command line front end: ``plot <kind> <csv...> -o <image>``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import KINDS, FigureSpec, PlotError, render


def _parse_pair(text: str):
    parts = text.split(":")
    if len(parts) != 2:
        raise PlotError(f"expected lo:hi, got '{text}'")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise PlotError(f"expected lo:hi, got '{text}'") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot",
        description="Render figures from wdcss CSV outputs.",
    )
    parser.add_argument("kind", choices=KINDS)
    parser.add_argument("csvs", nargs="+", metavar="csv")
    parser.add_argument("-o", "--out", required=True, help="output image path")
    parser.add_argument("--title")
    parser.add_argument("--xlabel")
    parser.add_argument("--ylabel")
    parser.add_argument("--xlim", help="lo:hi")
    parser.add_argument("--ylim", help="lo:hi")
    parser.add_argument("--dpi", type=int, default=150)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = FigureSpec(
            kind=args.kind,
            csv_paths=tuple(Path(p) for p in args.csvs),
            out_path=Path(args.out),
            title=args.title,
            xlabel=args.xlabel,
            ylabel=args.ylabel,
            xlim=_parse_pair(args.xlim) if args.xlim else None,
            ylim=_parse_pair(args.ylim) if args.ylim else None,
            dpi=args.dpi,
        )
        result = render(spec)
    except PlotError as exc:
        print(f"plot: {exc}", file=sys.stderr)
        return 1
    print(result.path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
