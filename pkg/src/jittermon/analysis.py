"""Ground-truth jitter, DTW scoring and trend reports."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from jittermon.core import NS_PER_US, JitterSeries, SimTime, as_values
from jittermon.simnet import ReceiverLog

Statistic = Literal["mean_abs_consecutive", "std_dev", "sq_std_dev"]
STATISTICS = ("mean_abs_consecutive", "std_dev", "sq_std_dev")


@dataclass(frozen=True)
class GroundTruthConfig:
    """Either fixed time intervals (pairs with controller estimates) or
    consecutive n-packet groups (pairs with data-plane estimates)."""

    mode: Literal["interval", "window"]
    statistic: Statistic = "mean_abs_consecutive"
    interval: SimTime | None = None
    n: int | None = None

    def __post_init__(self) -> None:
        if self.statistic not in STATISTICS:
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.mode == "interval":
            if self.interval is None or self.interval <= 0:
                raise ValueError("interval mode needs interval > 0")
        elif self.mode == "window":
            if self.n is None or self.n < 2:
                raise ValueError("window mode needs n >= 2")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")


def _unit(statistic: str) -> str:
    return "us^2" if statistic == "sq_std_dev" else "us"


def _group_stat(delays_us: np.ndarray, statistic: str) -> float:
    if statistic == "mean_abs_consecutive":
        return float(np.abs(np.diff(delays_us)).mean())
    std = float(np.std(delays_us, ddof=1))
    return std * std if statistic == "sq_std_dev" else std


def ground_truth_series(
    log: ReceiverLog, cfg: GroundTruthConfig, horizon: SimTime | None = None, label: str = "truth"
) -> JitterSeries:
    """Jitter actually experienced at the receiver, in microseconds.

    Interval mode emits one point per interval ((k-1)T, kT] at time kT,
    taken over packets received inside it; intervals with fewer than two
    packets are gaps. Window mode emits one point per consecutive group of
    n received packets at the arrival time of the group's last packet.
    Dropped packets simply are not in the log, so their neighbours pair up.
    """
    unit = _unit(cfg.statistic)
    if len(log) == 0:
        return JitterSeries(label, np.empty(0, np.int64), np.empty(0), unit)
    delays = log.delays.astype(np.float64) / NS_PER_US
    recv = log.received_at
    points: list[tuple[int, float]] = []
    if cfg.mode == "interval":
        T = int(cfg.interval)  # type: ignore[arg-type]
        last = int(recv[-1]) if horizon is None else horizon
        # interval k covers ((k-1)T, kT]
        bucket = -(-recv // T)
        n_buckets = -(-last // T)
        bounds = np.searchsorted(bucket, np.arange(1, n_buckets + 2), side="left")
        for k in range(1, n_buckets + 1):
            lo, hi = bounds[k - 1], bounds[k]
            if hi - lo < 2:
                continue
            points.append((k * T, _group_stat(delays[lo:hi], cfg.statistic)))
    else:
        n = int(cfg.n)  # type: ignore[arg-type]
        for g in range(len(delays) // n):
            chunk = delays[g * n : (g + 1) * n]
            points.append((int(recv[(g + 1) * n - 1]), _group_stat(chunk, cfg.statistic)))
    return JitterSeries.from_points(label, points, unit=unit)


# -- DTW ------------------------------------------------------------------------


@dataclass(frozen=True)
class DtwScore:
    distance: float
    per_point: float
    len_a: int
    len_b: int


def dtw_distance(a: JitterSeries | Sequence[float], b: JitterSeries | Sequence[float]) -> float:
    """Classic unconstrained DTW on values, cost |a_i - b_j|, no normalisation.

    Swept one anti-diagonal at a time so each step is a vector operation.
    """
    x, y = as_values(a), as_values(b)
    n, m = x.size, y.size
    if n == 0 or m == 0:
        raise ValueError("DTW needs two non-empty series")
    # diagonals indexed by row i in 0..n; cell (i, j) lives on diagonal i + j
    inf = np.inf
    d2 = np.full(n + 1, inf)
    d2[0] = 0.0
    d1 = np.full(n + 1, inf)
    for s in range(2, n + m + 1):
        lo, hi = max(1, s - m), min(n, s - 1)
        i = np.arange(lo, hi + 1)
        cost = np.abs(x[i - 1] - y[s - i - 1])
        best = np.minimum(np.minimum(d2[i - 1], d1[i - 1]), d1[i])
        cur = np.full(n + 1, inf)
        cur[i] = cost + best
        d2, d1 = d1, cur
    return float(d1[n])


def dtw_report(a: JitterSeries | Sequence[float], b: JitterSeries | Sequence[float]) -> DtwScore:
    la, lb = len(as_values(a)), len(as_values(b))
    dist = dtw_distance(a, b)
    return DtwScore(dist, dist / max(la, lb), la, lb)


# -- trend report ------------------------------------------------------------------

_ORDER_TOKEN = re.compile(r"\s*(<=|<)\s*")


@dataclass(frozen=True)
class TrendCheck:
    ordering: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class TrendReport:
    rows: tuple[tuple[str, float], ...]
    checks: tuple[TrendCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def format(self) -> str:
        width = max((len(label) for label, _ in self.rows), default=5)
        lines = [f"{'run':<{width}}  dtw_distance"]
        lines += [f"{label:<{width}}  {value:.6g}" for label, value in self.rows]
        lines.append("")
        for c in self.checks:
            lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.ordering}  ({c.detail})")
        return "\n".join(lines) + "\n"


def parse_ordering(text: str) -> list[tuple[str, str, str]]:
    """'a < b <= c' -> [(a, '<', b), (b, '<=', c)]"""
    parts = _ORDER_TOKEN.split(text.strip())
    if len(parts) < 3 or len(parts) % 2 == 0:
        raise ValueError(f"bad ordering {text!r}")
    labels, ops = parts[0::2], parts[1::2]
    return [(labels[k], ops[k], labels[k + 1]) for k in range(len(ops))]


def trend_report(runs: Sequence[tuple[str, float]], orderings: Sequence[str] = ()) -> TrendReport:
    if len(runs) < 2:
        raise ValueError("a trend needs at least two runs")
    values = dict(runs)
    checks = []
    for text in orderings:
        ok = True
        details = []
        for left, op, right in parse_ordering(text):
            if left not in values or right not in values:
                raise KeyError(f"ordering {text!r} names an unknown run")
            a, b = values[left], values[right]
            holds = a < b if op == "<" else a <= b
            ok &= holds
            details.append(f"{a:.6g} {op} {b:.6g}")
        checks.append(TrendCheck(text, ok, ", ".join(details)))
    return TrendReport(tuple((k, float(v)) for k, v in runs), tuple(checks))
