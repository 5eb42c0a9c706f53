"""(B)-property scans of random symmetric polygons against the square.

Writes the tidy f(s) / second-difference series for every body to one CSV.

    python scripts/b_scan.py --bodies 20 --out b_scan.csv
"""
import argparse
from pathlib import Path

import numpy as np

from logbm.core import cube
from logbm.generators import random_symmetric_polygon
from logbm.lab import scan_b_property
from logbm.report import rows_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--bodies", type=int, default=20)
    ap.add_argument("--s-max", type=float, default=2.0)
    ap.add_argument("--step", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="b_scan.csv")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    k = int(round(args.s_max / args.step))
    s = np.arange(-k, k + 1) * args.step
    rows, violations = [], 0
    for i in range(args.bodies):
        t = np.exp(rng.uniform(-1, 1, size=2))
        r = scan_b_property(cube(2), random_symmetric_polygon(rng), t, s)
        violations += r.details["violations"]
        rows += [{"body": i, "t1": t[0], "t2": t[1], **row} for row in r.details["series"]]
    Path(args.out).write_text(rows_to_csv(rows))
    print(f"{args.bodies} bodies, {violations} violations -> {args.out}")


if __name__ == "__main__":
    main()
