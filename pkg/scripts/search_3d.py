"""Exploratory counterexample search in three dimensions.

No pass/fail: the worst candidate and the near-equality cases are archived
for inspection.

    python scripts/search_3d.py --iters 200 --seed 42 --archive search3d.json
"""
import argparse
import time
from pathlib import Path

from logbm.lab import SearchConfig, search_counterexample


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--iters", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--grid", type=int, default=None, help="Fibonacci directions per body")
    ap.add_argument("--archive", default="search3d.json")
    args = ap.parse_args()

    t0 = time.perf_counter()
    r = search_counterexample(3, SearchConfig(grid=args.grid), seed=args.seed, iterations=args.iters)
    Path(args.archive).write_text(r.to_json() + "\n")
    print(f"worst margin {r.margin:+.3e} ({r.verdict.value}), "
          f"{len(r.details['equality_candidates'])} near-equality candidates, "
          f"{time.perf_counter() - t0:.1f}s -> {args.archive}")


if __name__ == "__main__":
    main()
