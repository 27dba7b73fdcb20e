"""Command line front end.

One subcommand per chart kind. Each takes an input CSV and output paths;
at least one image path for the figure kinds, markdown for the table.
"""

from __future__ import annotations

import argparse
import sys

from . import emitter


def _add_outputs(sub, images: bool):
    sub.add_argument("csv", help="input CSV")
    if images:
        sub.add_argument("--png", default=None)
        sub.add_argument("--svg", default=None)
    sub.add_argument("--markdown", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot-emitter",
        description="Render simulation CSVs to figures and markdown.")
    subs = parser.add_subparsers(dest="command", required=True)

    bars = subs.add_parser("bars", help="grouped MSE bars from report.csv")
    _add_outputs(bars, images=True)

    par = subs.add_parser("parabola",
                          help="MSE scatter with stored a*p*(1-p) curves")
    _add_outputs(par, images=True)

    cov = subs.add_parser("coverage",
                          help="aligned markdown table from coverage.csv")
    _add_outputs(cov, images=False)

    return parser


_KINDS = {
    "bars": emitter.ChartKind.BARS,
    "parabola": emitter.ChartKind.PARABOLA,
    "coverage": emitter.ChartKind.COVERAGE_TABLE,
}


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    req = emitter.PlotRequest(
        kind=_KINDS[ns.command],
        csv=ns.csv,
        png=getattr(ns, "png", None),
        svg=getattr(ns, "svg", None),
        markdown=ns.markdown,
    )
    try:
        written = emitter.render(req)
    except (emitter.EmitterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for name in sorted(written):
        print(f"wrote {written[name]}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
