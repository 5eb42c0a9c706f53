"""Sweep lambda over 21 points for one pair and write the log-BM series.

    python scripts/lambda_sweep.py --out sweep        # sweep.jsonl + sweep.csv
    python scripts/lambda_sweep.py --k K.json --l L.json --mc 100000
"""
import argparse
from pathlib import Path

import numpy as np

from logbm.core import box, rotate2d
from logbm.io import load_body
from logbm.lab import check_log_bm
from logbm.report import emit_plot_data, rows_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--k", help="body JSON (default: unit square)")
    ap.add_argument("--l", help="body JSON (default: the square rotated by 45 degrees)")
    ap.add_argument("--points", type=int, default=21)
    ap.add_argument("--mc", type=int, default=10**5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="lambda_sweep")
    args = ap.parse_args()

    K = load_body(args.k) if args.k else box([1, 1])
    L = load_body(args.l) if args.l else rotate2d(box([1, 1]), np.pi / 4)
    # endpoints are trivial equalities; keep lambda inside (0, 1)
    lams = np.linspace(0, 1, args.points + 2)[1:-1]
    reports = [check_log_bm(K, L, float(lam), mc=args.mc, seed=args.seed) for lam in lams]

    out = Path(args.out)
    out.with_suffix(".jsonl").write_text("".join(r.to_json() + "\n" for r in reports))
    out.with_suffix(".csv").write_text(rows_to_csv(emit_plot_data(reports)))
    for r in reports:
        print(f"lambda={r.params['lambda']:.4f}  margin={r.margin:+.6f}  slack={r.slack:.1e}  {r.verdict.value}")


if __name__ == "__main__":
    main()
