#!/usr/bin/env python3
"""Mesh/parameter study for the 1D certified enclosures.

For each source term, builds the certified super/sub pair over a range of
mesh widths with the default parameter rules (c = 0.2 |f| h^2,
eps = 0.25 h |f|) and prints the maximal nodal gap; the gap should decrease
monotonically with h for the smooth sources and the jump sources alike.

Usage: python scripts/sweep_1d.py [--out gaps.csv]
"""

import argparse

from greenbound import PiecewiseSource1D, parse, sweep
from greenbound.oned import sweep_csv

SOURCES = [
    ("f=1", parse("1")),
    ("f=5", parse("5")),
    ("jump a=0.25 n=4", PiecewiseSource1D((0.25,), (parse("1"), parse("1.125")))),
]

H_LIST = [2.0**-5, 2.0**-6, 2.0**-7]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=None, help="also write CSV here")
    args = ap.parse_args()
    blocks = []
    for name, f in SOURCES:
        rows = sweep(f, H_LIST)
        blocks.append((name, rows))
        print(f"# {name}")
        for r in rows:
            print(f"  h={r.h:<12g} c={r.c:.3e} eps={r.eps:.3e} "
                  f"iters={r.iterations:3d} max_gap={r.max_gap:.6e}")
    if args.out:
        with open(args.out, "w") as fh:
            for name, rows in blocks:
                fh.write(f"# {name}\n")
                fh.write(sweep_csv(rows))


if __name__ == "__main__":
    main()
