"""Command-line front end: render one figure from a trajectory CSV."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .render import FORMATS, KINDS, PlotError, PlotSpec, render


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoatt-plot",
        description="Render figures from geoatt trajectory CSV files",
    )
    parser.add_argument("--csv", required=True, help="trajectory CSV file")
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--format", choices=FORMATS, default=None,
                        help="image format (default: from --out suffix)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    fmt = args.format or Path(args.out).suffix.lstrip(".").lower() or "png"
    try:
        out = render(PlotSpec(csv_path=args.csv, kind=args.kind,
                              out_path=args.out, format=fmt))
    except PlotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
