"""figplots command line: render one figure from a summary.csv.

    figplots plot --figure fig1 --in summary.csv --out fig1.svg

Exit codes: 0 success, 1 usage/schema error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

from .render import FIGURES, EmptySummaryError, SchemaError, render


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise SchemaError(message)


def main(argv=None) -> int:
    parser = _Parser(prog="figplots", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_plot = sub.add_parser("plot", help="render a figure")
    p_plot.add_argument("--figure", required=True, choices=FIGURES)
    p_plot.add_argument("--in", dest="infile", required=True)
    p_plot.add_argument("--out", required=True)
    try:
        args = parser.parse_args(argv)
        svg_path, png_path = render(args.figure, args.infile, args.out)
        print(f"wrote {svg_path} and {png_path}")
    except (SchemaError, EmptySummaryError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    except Exception as exc:  # noqa: BLE001
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
