"""Compare controller estimates at 1 s and 3 s poll intervals on the 90 Mb/s run.

Longer intervals average away more of the short-term queue variation, so the
estimate series is both shorter and smoother.
"""

import argparse

import numpy as np

from jittermon.config import parse_seeds
from jittermon.scenarios import BUILTINS, mean_scores, run_batch


def main() -> None:
    p = argparse.ArgumentParser()
    p.add_argument("--seeds", default="1..5")
    args = p.parse_args()
    results = run_batch([BUILTINS["single-flow-90"], BUILTINS["poll-3s"]], parse_seeds(args.seeds))
    for label, value in sorted(mean_scores(results).items()):
        runs = [r for r in results if f"{r.scenario}/ctrl" == label]
        per_point = np.mean([r.scores["ctrl"].per_point for r in runs])
        points = np.mean([len(r.series["ctrl_estimate"]) for r in runs])
        print(f"{label:<22} dtw {value:10.1f}  per point {per_point:7.2f} us  points {points:6.1f}")


if __name__ == "__main__":
    main()
