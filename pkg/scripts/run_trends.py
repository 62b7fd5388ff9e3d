"""Run the three trend families over a seed range and print seed-mean DTW.

    python3 scripts/run_trends.py --seeds 1..10 --out out/trends
"""

import argparse
import sys
import time
from pathlib import Path

from jittermon.config import parse_seeds
from jittermon.scenarios import FAMILIES, batch_trend_report, resolve, run_batch, write_run


def main() -> int:
    p = argparse.ArgumentParser()
    p.add_argument("--seeds", default="1..10")
    p.add_argument("--families", default="utilization,hop-position,window-size")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", type=Path)
    args = p.parse_args()
    seeds = parse_seeds(args.seeds)
    ok = True
    for fam in args.families.split(","):
        t0 = time.perf_counter()
        results = run_batch(resolve(fam), seeds, jobs=args.jobs)
        report = batch_trend_report(results, FAMILIES[fam].orderings)
        print(f"== {fam} ({len(seeds)} seeds, {time.perf_counter() - t0:.0f}s)")
        print(report.format())
        ok &= report.passed
        if args.out is not None:
            for r in results:
                write_run(r, args.out)
    return 0 if ok else 3


if __name__ == "__main__":
    sys.exit(main())
