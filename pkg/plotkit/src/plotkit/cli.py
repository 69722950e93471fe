"""plotkit command line: render a stringstab CSV to a figure.

    plotkit <errors.csv|sweep.csv> --kind error-traces|norm-vs-n --out fig.png

Exit codes: 0 success, 2 for unreadable input, header-contract
violations or empty data.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .errors import PlotkitError
from .render import KINDS, PlotJob, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    parser.add_argument("input", help="errors.csv or sweep.csv produced by stringstab")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path (raster)")
    parser.add_argument("--title")
    parser.add_argument("--xlabel")
    parser.add_argument("--ylabel")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    job = PlotJob(
        input_path=args.input,
        output_path=args.out,
        kind=args.kind,
        title=args.title,
        xlabel=args.xlabel,
        ylabel=args.ylabel,
    )
    try:
        render(job)
    except (PlotkitError, OSError) as err:
        sys.stderr.write(f"plotkit: {err}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
