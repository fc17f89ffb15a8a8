"""Command-line entry: ``plot <figure-id> --in <csv> [--in2 <csv>] --out <img>``."""

from __future__ import annotations

import argparse
import sys

from .figures import FIGURE_IDS, FigureSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot", description="Render radium-lab result figures from CSV files.")
    parser.add_argument("figure_id", choices=FIGURE_IDS)
    parser.add_argument("--in", dest="input", required=True, help="result CSV")
    parser.add_argument("--in2", dest="input2", default=None,
                        help="optional second CSV (protocol overlay)")
    parser.add_argument("--out", required=True, help="output image path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    inputs = (args.input,) if args.input2 is None else (args.input, args.input2)
    try:
        spec = FigureSpec(figure_id=args.figure_id, inputs=inputs, output=args.out)
        render(spec)
        print(f"{args.figure_id}: {' + '.join(inputs)} -> {args.out}")
        return 0
    except Exception as exc:
        print(f"plot: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
