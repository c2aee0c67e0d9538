#!/usr/bin/env python3
"""Max-call benchmark grids (symmetric / asymmetric vols, four-feature mode).

The published grid runs up to 500 dimensions with 4.096M test paths; that is
deliberately behind the --scale flag.  A 0.01 scale finishes in minutes and
already tracks the reference column closely in low dimensions.

    python scripts/maxcall_table.py maxcall_sym --scale 0.01
"""

import argparse

from treestop.cli import run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("suite", choices=["maxcall_sym", "maxcall_asym", "barrier"])
    ap.add_argument("--scale", type=float, default=0.01)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    out = args.out or f"{args.suite}_table.csv"
    run_benchmark(args.suite, args.scale, out, threads=args.threads)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
