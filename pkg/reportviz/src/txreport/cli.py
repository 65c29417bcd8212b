"""Command line: render one figure from engine output files."""

import argparse
import sys

from .figures import KINDS, FigureJob, render


def build_parser():
    ap = argparse.ArgumentParser(
        prog="txreport", description="Diagnostic figures from engine outputs."
    )
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("report", help="render one figure")
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--estimates", default=None)
    p.add_argument("--truth", default=None)
    p.add_argument("--diagnostics", default=None)
    p.add_argument("--estimates2", default=None,
                   help="second estimates file for scatter plots")
    p.add_argument("--out", required=True)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        job = FigureJob(
            kind=args.kind, out=args.out, estimates=args.estimates,
            truth=args.truth, diagnostics=args.diagnostics,
            estimates2=args.estimates2,
        )
        render(job)
    except Exception as exc:  # noqa: BLE001 - single reporting point
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
