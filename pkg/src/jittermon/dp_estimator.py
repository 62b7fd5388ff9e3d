"""Data-plane jitter estimators restricted to switch-friendly arithmetic.

Everything here is integer: sums, shifts and |a - b|. Window statistics
divide only by 2**m, and the single multiplication (squaring a deviation)
sits in :func:`euclid_sq`. No square roots: the Euclidean estimate is a
variance and is compared against squared jitter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

import numpy as np

from jittermon.core import MAX_SHIFT, FixedDelay, JitterSeries, SimTime, fixed_sub_abs
from jittermon.simnet import DelayStream

ACCUMULATOR_BITS = 96
EWMA_FRAC_BITS = 16


@dataclass(frozen=True)
class WindowEstimates:
    mean: FixedDelay
    euclid_sq: int
    manhattan: FixedDelay


class DelayWindow:
    """Non-overlapping window of n = 2**m + 1 one-way delays.

    Statistics are produced when the n-th delay arrives; the next push then
    starts a fresh window. Delays are kept in arrival order.
    """

    def __init__(self, m: int):
        if not 1 <= m <= MAX_SHIFT:
            raise ValueError(f"window exponent must be in [1, {MAX_SHIFT}], got {m}")
        self.m = m
        self.capacity = (1 << m) + 1
        self._slots: list[FixedDelay] = []

    @classmethod
    def full(cls, m: int, delays: Sequence[FixedDelay | int]) -> "DelayWindow":
        window = cls(m)
        if len(delays) != window.capacity:
            raise ValueError(f"need {window.capacity} delays, got {len(delays)}")
        window._slots = [d if isinstance(d, FixedDelay) else FixedDelay(d) for d in delays]
        return window

    @property
    def fill(self) -> int:
        return len(self._slots)

    @property
    def is_full(self) -> bool:
        return len(self._slots) == self.capacity

    @property
    def slots(self) -> tuple[FixedDelay, ...]:
        return tuple(self._slots)

    def push(self, d: FixedDelay) -> WindowEstimates | None:
        if self.is_full:
            self._slots.clear()
        self._slots.append(d)
        if not self.is_full:
            return None
        mean = window_mean(self)
        return WindowEstimates(mean, euclid_sq(self, mean), manhattan_dev(self, mean))


def _require_full(window: DelayWindow) -> None:
    if not window.is_full:
        raise ValueError(f"window holds {window.fill} of {window.capacity} delays")


def window_mean(window: DelayWindow) -> FixedDelay:
    """Mean of the most recent 2**m delays (the oldest slot is left out)."""
    _require_full(window)
    acc = 0
    for d in window._slots[1:]:
        acc += d.value
    # the accumulator is wider than a register; shift before narrowing
    return FixedDelay(acc >> window.m)


def euclid_sq(window: DelayWindow, mean: FixedDelay) -> int:
    """Sum of squared deviations over all n slots, shifted right by m."""
    _require_full(window)
    acc = 0
    for d in window._slots:
        dev = fixed_sub_abs(d, mean).value
        acc += dev * dev
    if acc >> ACCUMULATOR_BITS:
        raise OverflowError("squared-deviation accumulator exceeded 96 bits")
    return acc >> window.m


def manhattan_dev(window: DelayWindow, mean: FixedDelay) -> FixedDelay:
    """Sum of absolute deviations over all n slots, shifted right by m."""
    _require_full(window)
    acc = 0
    for d in window._slots:
        acc += fixed_sub_abs(d, mean).value
    return FixedDelay(acc >> window.m)


# -- EWMA -----------------------------------------------------------------------


@dataclass
class EwmaState:
    """Running jitter average with weight 1 - 2**-shift on the old value.

    shift=3 gives the 7/8, 1/8 pair, shift=4 the 15/16, 1/16 pair. The value
    is kept in fixed point with 16 fractional bits so the update is a
    shift-and-subtract.
    """

    shift: int = 4
    scaled: int = 0
    previous_delay: FixedDelay | None = None

    def __post_init__(self) -> None:
        if self.shift not in (3, 4):
            raise ValueError("EWMA shift must be 3 (7/8) or 4 (15/16)")

    @property
    def weights(self) -> tuple[Fraction, Fraction]:
        new = Fraction(1, 1 << self.shift)
        return 1 - new, new

    @property
    def current(self) -> float:
        return self.scaled / (1 << EWMA_FRAC_BITS)


def ewma_update(state: EwmaState, d: FixedDelay) -> float:
    """Fold |d - previous delay| into the average; the first delay only primes it."""
    if state.previous_delay is not None:
        sample = fixed_sub_abs(d, state.previous_delay).value << EWMA_FRAC_BITS
        k = state.shift
        state.scaled = state.scaled - (state.scaled >> k) + (sample >> k)
    state.previous_delay = d
    return state.current


# -- driving a delay stream --------------------------------------------------------


@dataclass(frozen=True)
class WindowRecord:
    window_index: int
    completed_at: SimTime
    estimates: WindowEstimates
    ewma: float | None = None


@dataclass
class SwitchMonitor:
    """Per (switch, flow) estimator state fed in arrival order."""

    m: int
    ewma_shift: int | None = None
    window: DelayWindow = field(init=False)
    ewma: EwmaState | None = field(init=False)
    completed: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.window = DelayWindow(self.m)
        self.ewma = EwmaState(self.ewma_shift) if self.ewma_shift is not None else None

    def observe(self, d: FixedDelay, at: SimTime) -> WindowRecord | None:
        current = ewma_update(self.ewma, d) if self.ewma is not None else None
        est = self.window.push(d)
        if est is None:
            return None
        rec = WindowRecord(self.completed, at, est, current)
        self.completed += 1
        return rec


def monitor_stream(stream: DelayStream, m: int, ewma_shift: int | None = None) -> Iterator[WindowRecord]:
    mon = SwitchMonitor(m, ewma_shift)
    for at, d in zip(stream.at.tolist(), stream.delay_us.tolist()):
        rec = mon.observe(FixedDelay(d), at)
        if rec is not None:
            yield rec


def records_to_series(
    records: Iterable[WindowRecord], prefix: str, with_ewma: bool | None = None
) -> dict[str, JitterSeries]:
    """Split records into per-kind series; ``with_ewma`` defaults to whether
    the records carry an EWMA value."""
    recs = list(records)
    if with_ewma is None:
        with_ewma = bool(recs) and recs[0].ewma is not None
    at = np.array([r.completed_at for r in recs], dtype=np.int64)
    out = {
        "euclid": JitterSeries(
            f"{prefix}_euclid", at, np.array([float(r.estimates.euclid_sq) for r in recs]), "us^2"
        ),
        "manhattan": JitterSeries(
            f"{prefix}_manhattan", at, np.array([float(r.estimates.manhattan.value) for r in recs]), "us"
        ),
    }
    if with_ewma:
        out["ewma"] = JitterSeries(f"{prefix}_ewma", at, np.array([r.ewma for r in recs], dtype=np.float64), "us")
    return out


def dataplane_series(stream: DelayStream, m: int, ewma_shift: int | None = None) -> dict[str, JitterSeries]:
    """All data-plane estimate series for one switch, keyed by estimator kind."""
    return records_to_series(monitor_stream(stream, m, ewma_shift), stream.switch_id, ewma_shift is not None)
