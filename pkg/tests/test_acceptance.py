"""Acceptance gate: one PASS/FAIL line per criterion (see the terminal summary).

Criteria 4 to 6 simulate ten seeds per scenario at full length and take
several minutes on one core.
"""

import time
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from jittermon.analysis import dtw_distance
from jittermon.core import NS_PER_S, FixedDelay
from jittermon.ctrl_estimator import (
    build_rounds,
    estimate_series,
    jitter_estimate_step,
    per_packet_time,
    rate,
)
from jittermon.dp_estimator import DelayWindow, euclid_sq, manhattan_dev, window_mean
from jittermon.scenarios import (
    BUILTINS,
    FAMILIES,
    TAGGED_FLOW,
    batch_trend_report,
    dtw_report_text,
    evaluate,
    resolve,
    run_batch,
    series_csv,
    simulate,
)
from jittermon.simnet import PortCounterSample

SEEDS = list(range(1, 11))


@pytest.fixture(scope="module")
def controller_runs():
    return run_batch(resolve("utilization"), SEEDS)


@pytest.fixture(scope="module")
def dataplane_runs():
    return run_batch(resolve("hop-position,window-size"), SEEDS)


def test_criterion_1_zero_jitter(criterion):
    start = time.perf_counter()
    (res,) = run_batch([BUILTINS["zero-jitter"]], [1])
    elapsed = time.perf_counter() - start
    wanted = ["ctrl_estimate"] + [f"dp_{k}_{s}" for k in ("euclid", "manhattan", "ewma") for s in ("S1", "S2", "S3")]
    truths = [k for k in res.series if k.startswith("truth")]
    nonzero = [k for k in wanted + truths if len(res.series[k]) == 0 or np.any(res.series[k].values != 0)]
    ok = not nonzero and elapsed < 1.0 and len(truths) == 4
    criterion(1, ok, f"{len(wanted) + len(truths)} series identically 0, nonzero/empty={nonzero}, {elapsed:.2f}s")
    assert ok


def _brute_force_dtw(a, b):
    n, m = len(a), len(b)

    @lru_cache(maxsize=None)
    def paths(i, j):
        if (i, j) == (n - 1, m - 1):
            return (((i, j),),)
        out = ()
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di < n and j + dj < m:
                out += tuple(((i, j),) + p for p in paths(i + di, j + dj))
        return out

    best = np.inf
    for p in paths(0, 0):
        total = 0.0
        for i, j in p:
            total += abs(a[i] - b[j])
        best = min(best, total)
    return best


def test_criterion_2_dtw_exhaustive(criterion):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(200):
        a = rng.uniform(0, 1000, rng.integers(1, 7)).tolist()
        b = rng.uniform(0, 1000, rng.integers(1, 7)).tolist()
        mismatches += dtw_distance(a, b) != _brute_force_dtw(tuple(a), tuple(b))
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 5.0
    criterion(2, ok, f"200 pairs, {mismatches} mismatches, {elapsed:.2f}s")
    assert ok


def test_criterion_3_fixed_point_fidelity(criterion):
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst_man = worst_euc = 0.0
    bad = 0
    for _ in range(10_000):
        m = int(rng.integers(1, 6))
        n = 2**m + 1
        delays = rng.integers(0, 10**6 + 1, n)
        w = DelayWindow.full(m, [FixedDelay(int(d)) for d in delays])
        mean = window_mean(w)
        d = delays.astype(np.float64)
        mu = d[1:].mean()
        man_err = abs(manhattan_dev(w, mean).value - np.abs(d - mu).sum() / 2**m)
        euc_err = abs(euclid_sq(w, mean) - ((d - mu) ** 2).sum() / 2**m)
        worst_man, worst_euc = max(worst_man, man_err / n), max(worst_euc, euc_err / (n * delays.max()))
        bad += man_err > n or euc_err > n * delays.max()
    elapsed = time.perf_counter() - start
    ok = bad == 0 and elapsed < 10.0
    criterion(3, ok, f"10000 windows, worst err/bound manhattan {worst_man:.3g} euclid {worst_euc:.3g}, {elapsed:.2f}s")
    assert ok


def _trend(n, runs, family, criterion):
    report = batch_trend_report(runs, FAMILIES[family].orderings)
    detail = "; ".join(f"{c.ordering} ({c.detail})" for c in report.checks)
    criterion(n, report.passed, f"{len(SEEDS)} seeds: {detail}")
    assert report.passed, report.format()


def test_criterion_4_utilization_trend(controller_runs, criterion):
    _trend(4, controller_runs, "utilization", criterion)


def test_criterion_5_hop_position_trend(dataplane_runs, criterion):
    _trend(5, dataplane_runs, "hop-position", criterion)


def test_criterion_6_window_size_trend(dataplane_runs, criterion):
    _trend(6, dataplane_runs, "window-size", criterion)


def test_criterion_7_controller_invariants(criterion):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    failures = []
    for _ in range(500):
        prev, curr, c = rng.uniform(0, 1, 3)
        if not np.isclose(jitter_estimate_step(prev + c, curr + c), jitter_estimate_step(prev, curr), rtol=0, atol=1e-12):
            failures.append("shift")
        c0, delta = int(rng.integers(0, 10**9)), int(rng.integers(1, 10**6))
        t0, dt = int(rng.integers(0, 10**12)), int(rng.integers(1, 10**11))
        a = PortCounterSample("S1", 1, "rx", c0, t0)
        b = PortCounterSample("S1", 1, "rx", c0 + delta, t0 + dt)
        if not np.isclose(per_packet_time(a, b) * rate(a, b), 1.0, rtol=1e-12, atol=0):
            failures.append("ppt*rate")
    for _ in range(100):
        counts = rng.integers(0, 4, (int(rng.integers(1, 10)), 3))
        sets, cum = [[PortCounterSample("S", p, "rx", 0, 0) for p in range(3)]], np.zeros(3, int)
        for k, row in enumerate(counts, start=1):
            cum = cum + row
            sets.append([PortCounterSample("S", p, "rx", int(cum[p]), k * NS_PER_S) for p in range(3)])
        rounds = build_rounds(sets)
        expected = [rounds[k].at for k in range(1, len(rounds)) if not (rounds[k].degraded or rounds[k - 1].degraded)]
        if estimate_series(rounds).at.tolist() != expected:
            failures.append("gap")
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 1.0
    criterion(7, ok, f"shift/ppt*rate/gap checks, failures={sorted(set(failures))}, {elapsed:.2f}s")
    assert ok


def test_criterion_8_conservation_and_determinism(controller_runs, dataplane_runs, criterion):
    zero = run_batch([BUILTINS["zero-jitter"]], [1])
    runs = controller_runs + dataplane_runs + zero
    violations = [f"{r.scenario}/{r.seed}: {v}" for r in runs for v in r.violations]
    cfg = replace(BUILTINS["single-flow-100"], duration_s=20.0)

    def fingerprint():
        out = simulate([cfg], 42, events=True)
        res = evaluate(cfg, out)
        return "\n".join(out.event_lines()) + dtw_report_text(res) + "".join(series_csv(s) for s in res.series.values())

    identical = fingerprint() == fingerprint()
    ok = not violations and identical
    criterion(8, ok, f"{len(runs)} runs checked, violations={violations[:3]}, same-seed rerun identical={identical}")
    assert ok


def test_criterion_9_loss_at_saturation(controller_runs, criterion):
    drops = [r.dropped[TAGGED_FLOW] for r in controller_runs if r.scenario == "single-flow-100"]
    ok = len(drops) == len(SEEDS) and all(d > 0 for d in drops)
    criterion(9, ok, f"single-flow-100 tagged drops per seed {drops}")
    assert ok
