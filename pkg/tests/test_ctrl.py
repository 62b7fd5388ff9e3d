import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from jittermon.core import NS_PER_S
from jittermon.ctrl_estimator import (
    CounterIntegrityError,
    PollConfig,
    PollRound,
    build_rounds,
    estimate_series,
    jitter_estimate_step,
    per_packet_time,
    poll_round_sum,
    rate,
)
from jittermon.simnet import PortCounterSample


def sample(count, at, port=1, direction="rx", switch="S1"):
    return PortCounterSample(switch, port, direction, count, at)


def test_per_packet_time_example():
    # 1000 packets in one second: 1 ms each
    assert per_packet_time(sample(0, 0), sample(1000, NS_PER_S)) == pytest.approx(1e-3)
    assert rate(sample(0, 0), sample(1000, NS_PER_S)) == pytest.approx(1000.0)
    assert per_packet_time(sample(5, 0), sample(5, NS_PER_S)) is None


def test_counter_integrity():
    with pytest.raises(CounterIntegrityError):
        per_packet_time(sample(10, 0), sample(9, NS_PER_S))
    with pytest.raises(CounterIntegrityError):
        per_packet_time(sample(0, NS_PER_S), sample(1, NS_PER_S))
    with pytest.raises(CounterIntegrityError):
        per_packet_time(sample(0, 0, port=1), sample(1, NS_PER_S, port=2))


def test_poll_config_validation():
    with pytest.raises(ValueError):
        PollConfig(0, (("S1", 1, "rx"),))
    with pytest.raises(ValueError):
        PollConfig(NS_PER_S, ())
    with pytest.raises(ValueError):
        PollConfig(NS_PER_S, (("S1", 1, "rx"), ("S1", 1, "rx")))


def test_estimate_step_example():
    # sums of 3 ms then 3.5 ms give a 500 us step
    assert jitter_estimate_step(3e-3, 3.5e-3) == pytest.approx(5e-4)
    assert jitter_estimate_step(3.5e-3, 3e-3) == pytest.approx(5e-4)


def _sets(counts_per_round, ports=2):
    """Cumulative counters for `ports` ports from per-round packet counts."""
    out, cum = [], [0] * ports
    out.append([sample(0, 0, port=p) for p in range(ports)])
    for k, counts in enumerate(counts_per_round, start=1):
        cum = [c + n for c, n in zip(cum, counts)]
        out.append([sample(cum[p], k * NS_PER_S, port=p) for p in range(ports)])
    return out


def test_rounds_and_series_example():
    rounds = build_rounds(_sets([(1000, 1000), (500, 1000), (1000, 1000)]))
    assert [r.degraded for r in rounds] == [False, False, False]
    assert poll_round_sum(rounds[0]) == pytest.approx(2e-3)
    assert poll_round_sum(rounds[1]) == pytest.approx(3e-3)
    est = estimate_series(rounds)
    assert est.at.tolist() == [2 * NS_PER_S, 3 * NS_PER_S]
    assert est.values.tolist() == pytest.approx([1000.0, 1000.0])
    assert est.unit == "us"


def test_degraded_round_leaves_gaps_on_both_sides():
    rounds = build_rounds(_sets([(10, 10), (10, 20), (0, 10), (10, 10), (20, 10)]))
    assert [r.degraded for r in rounds] == [False, False, True, False, False]
    est = estimate_series(rounds)
    # steps into and out of round 3 are missing; 2 and 5 remain
    assert est.at.tolist() == [2 * NS_PER_S, 5 * NS_PER_S]


@given(
    prev=st.floats(0, 10, allow_nan=False),
    curr=st.floats(0, 10, allow_nan=False),
    c=st.floats(-10, 10, allow_nan=False),
)
def test_step_shift_invariant(prev, curr, c):
    assert jitter_estimate_step(prev + c, curr + c) == pytest.approx(jitter_estimate_step(prev, curr), abs=1e-9)


@given(
    c0=st.integers(0, 10**9),
    delta=st.integers(1, 10**7),
    t0=st.integers(0, 10**12),
    dt=st.integers(1, 10**11),
)
def test_per_packet_time_times_rate_is_one(c0, delta, t0, dt):
    a, b = sample(c0, t0), sample(c0 + delta, t0 + dt)
    assert per_packet_time(a, b) * rate(a, b) == pytest.approx(1.0, rel=1e-12)


@given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50)), min_size=1, max_size=12))
def test_gap_semantics_property(counts):
    rounds = build_rounds(_sets(counts))
    est = estimate_series(rounds)
    expected = [
        rounds[k].at
        for k in range(1, len(rounds))
        if not rounds[k].degraded and not rounds[k - 1].degraded
    ]
    assert est.at.tolist() == expected
    assert all(math.isfinite(v) and v >= 0 for v in est.values)


def test_build_rounds_size_mismatch():
    with pytest.raises(CounterIntegrityError):
        build_rounds([[sample(0, 0)], [sample(1, NS_PER_S), sample(1, NS_PER_S, port=2)]])
