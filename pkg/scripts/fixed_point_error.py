"""Measure how far the shift-only window statistics sit from float arithmetic.

Prints worst and mean absolute error per window exponent over random windows.
"""

import numpy as np

from jittermon.core import FixedDelay
from jittermon.dp_estimator import DelayWindow, euclid_sq, manhattan_dev, window_mean


def main(trials: int = 2000, max_delay: int = 10**6, seed: int = 0) -> None:
    rng = np.random.default_rng(seed)
    print(" m   n  manhattan max/mean err (us)   euclid max/mean rel err")
    for m in range(1, 7):
        n = 2**m + 1
        man, euc = [], []
        for _ in range(trials):
            d = rng.integers(0, max_delay + 1, n)
            w = DelayWindow.full(m, [FixedDelay(int(x)) for x in d])
            mean = window_mean(w)
            f = d.astype(float)
            mu = f[1:].mean()
            man.append(abs(manhattan_dev(w, mean).value - np.abs(f - mu).sum() / 2**m))
            exact = ((f - mu) ** 2).sum() / 2**m
            euc.append(abs(euclid_sq(w, mean) - exact) / max(exact, 1.0))
        print(f"{m:2d} {n:3d}  {max(man):10.3f} {np.mean(man):10.3f}          {max(euc):.2e} {np.mean(euc):.2e}")


if __name__ == "__main__":
    main()
