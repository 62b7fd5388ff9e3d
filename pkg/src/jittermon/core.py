"""Shared domain types: simulator time, fixed-point delays, packets, series."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# Simulator time is an int count of nanoseconds since simulation start.
SimTime = int

NS_PER_US = 1_000
NS_PER_S = 1_000_000_000

FIXED_DELAY_BITS = 48
FIXED_DELAY_MAX = (1 << FIXED_DELAY_BITS) - 1
MAX_SHIFT = 16


def seconds(value: float) -> SimTime:
    """Convert seconds to integer nanoseconds (rounded to nearest)."""
    return int(round(value * NS_PER_S))


def microseconds(value: float) -> SimTime:
    return int(round(value * NS_PER_US))


@dataclass(frozen=True, order=True, slots=True)
class FixedDelay:
    """Unsigned 48-bit delay in integer microseconds.

    Mirrors a data-plane register: there is no division, modulo, square
    root or subtraction that could go negative. The only arithmetic lives
    in :func:`fixed_sub_abs` and :func:`fixed_shr`.
    """

    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, (int, np.integer)) or isinstance(self.value, bool):
            raise TypeError(f"FixedDelay needs an integer, got {type(self.value).__name__}")
        if not 0 <= self.value <= FIXED_DELAY_MAX:
            raise OverflowError(f"FixedDelay out of 48-bit range: {self.value}")
        object.__setattr__(self, "value", int(self.value))

    @classmethod
    def from_ns(cls, ns: SimTime) -> "FixedDelay":
        """Truncate a nanosecond duration to switch timestamp granularity."""
        if ns < 0:
            raise ValueError(f"negative delay: {ns} ns")
        return cls(ns // NS_PER_US)

    def __int__(self) -> int:
        return self.value


def fixed_sub_abs(a: FixedDelay, b: FixedDelay) -> FixedDelay:
    """Return |a - b| without ever forming a negative intermediate."""
    if a.value >= b.value:
        return FixedDelay(a.value - b.value)
    return FixedDelay(b.value - a.value)


def fixed_shr(a: FixedDelay, m: int) -> FixedDelay:
    """Divide by 2**m, flooring, via a right shift."""
    if not 0 <= m <= MAX_SHIFT:
        raise ValueError(f"shift must be in [0, {MAX_SHIFT}], got {m}")
    return FixedDelay(a.value >> m)


@dataclass(slots=True)
class Packet:
    """A packet in flight.

    ``sent_at`` models the in-band timestamp header written by the sender;
    ``hop_rx`` collects (node, receive time) as the packet moves.
    """

    flow_id: str
    seq: int
    size: int
    sent_at: SimTime
    hop_rx: list[tuple[str, SimTime]] = field(default_factory=list)


@dataclass(frozen=True)
class JitterSeries:
    """An ordered (time, value) series: one estimate or one ground truth."""

    label: str
    at: np.ndarray
    values: np.ndarray
    unit: str = "us"

    def __post_init__(self) -> None:
        at = np.asarray(self.at, dtype=np.int64).copy()
        values = np.asarray(self.values, dtype=np.float64).copy()
        if at.ndim != 1 or at.shape != values.shape:
            raise ValueError("at and values must be 1-d and the same length")
        if at.size > 1 and np.any(np.diff(at) <= 0):
            raise ValueError(f"series {self.label!r}: times must be strictly increasing")
        if at.size and at[0] < 0:
            raise ValueError(f"series {self.label!r}: negative time")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ValueError(f"series {self.label!r}: values must be finite and >= 0")
        at.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "at", at)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_points(
        cls, label: str, points: Iterable[tuple[SimTime, float]], unit: str = "us"
    ) -> "JitterSeries":
        pts = list(points)
        at = [p[0] for p in pts]
        values = [p[1] for p in pts]
        return cls(label, np.array(at, dtype=np.int64), np.array(values, dtype=np.float64), unit)

    @property
    def points(self) -> list[tuple[int, float]]:
        return list(zip(self.at.tolist(), self.values.tolist()))

    def __len__(self) -> int:
        return int(self.values.size)

    def scaled(self, factor: float, unit: str) -> "JitterSeries":
        return JitterSeries(self.label, self.at, self.values * factor, unit)


def as_values(series: JitterSeries | Sequence[float] | np.ndarray) -> np.ndarray:
    if isinstance(series, JitterSeries):
        return series.values
    return np.asarray(series, dtype=np.float64)
